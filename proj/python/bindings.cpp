#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "modshift/adversary.hpp"
#include "modshift/experiment.hpp"
#include "modshift/fedcore.hpp"
#include "modshift/fim.hpp"
#include "modshift/shiftdesign.hpp"

namespace py = pybind11;
using namespace modshift;

namespace {

shiftdesign::ShiftScheme scheme_from(const std::string& name,
                                     const std::optional<Vector>& custom_gamma) {
  const auto kind = shiftdesign::scheme_from_name(name);
  if (kind == shiftdesign::SchemeKind::custom) {
    if (!custom_gamma.has_value()) {
      throw ConfigError("custom scheme requires a gamma vector");
    }
    return shiftdesign::ShiftScheme::custom(*custom_gamma);
  }
  return {kind, std::nullopt};
}

py::dict run_result_to_dict(const experiment::RunResult& result) {
  const auto n = static_cast<py::ssize_t>(result.rounds.size());
  py::list round;
  Vector loss_bob(n), loss_eve(n), shift_vs_bob(n), shift_vs_wstar(n), bob_update_norm(n),
      eve_update_norm(n), tamper_bound(n), alpha(n);
  py::list tamper_pass, secret_scalars;
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& r = result.rounds[static_cast<size_t>(i)];
    round.append(r.round);
    loss_bob[i] = r.loss_bob;
    loss_eve[i] = r.loss_eve;
    shift_vs_bob[i] = r.shift_vs_bob;
    shift_vs_wstar[i] = r.shift_vs_wstar;
    bob_update_norm[i] = r.bob_update_norm;
    eve_update_norm[i] = r.eve_update_norm;
    tamper_bound[i] = r.tamper_bound;
    alpha[i] = r.alpha;
    tamper_pass.append(r.tamper_pass);
    secret_scalars.append(r.secret_scalars);
  }
  py::dict trace;
  trace["round"] = round;
  trace["loss_bob"] = loss_bob;
  trace["loss_eve"] = loss_eve;
  trace["shift_vs_bob"] = shift_vs_bob;
  trace["shift_vs_wstar"] = shift_vs_wstar;
  trace["bob_update_norm"] = bob_update_norm;
  trace["eve_update_norm"] = eve_update_norm;
  trace["tamper_bound"] = tamper_bound;
  trace["tamper_pass"] = tamper_pass;
  trace["alpha"] = alpha;
  trace["secret_scalars"] = secret_scalars;

  py::dict out;
  out["trace"] = trace;
  out["summary"] =
      py::module_::import("json").attr("loads")(experiment::summary_json(result.summary));
  out["trace_csv"] = experiment::trace_csv(result.rounds);
  return out;
}

}  // namespace

PYBIND11_MODULE(_modshift, m) {
  m.doc() = "Model-privacy federated learning simulator: designed shifts that drive "
            "the eavesdropper's Fisher information to singularity.";

  py::register_exception<Error>(m, "ModShiftError", PyExc_RuntimeError);

  // --- data and training -----------------------------------------------
  py::class_<fedcore::LocalDataset>(m, "LocalDataset")
      .def(py::init<Matrix, Vector, int>(), py::arg("features"), py::arg("labels"),
           py::arg("agent_id") = 0)
      .def_property_readonly("features", &fedcore::LocalDataset::features)
      .def_property_readonly("labels", &fedcore::LocalDataset::labels)
      .def_property_readonly("agent_id", &fedcore::LocalDataset::agent_id)
      .def_property_readonly("sample_count", &fedcore::LocalDataset::sample_count)
      .def_property_readonly("dim", &fedcore::LocalDataset::dim);

  m.def("mse_loss", &fedcore::mse_loss, py::arg("w"), py::arg("data"),
        "Mean squared error of the linear model on the dataset.");
  m.def("mse_gradient", &fedcore::mse_gradient, py::arg("w"), py::arg("data"),
        "Full-batch gradient of mse_loss.");
  m.def("global_loss", &fedcore::global_loss, py::arg("w"), py::arg("datasets"),
        "Sample-weighted loss over all agents.");
  m.def(
      "local_descent",
      [](const Vector& w, const fedcore::LocalDataset& data, double eta, int local_epochs) {
        fedcore::TrainConfig cfg;
        cfg.eta = eta;
        cfg.local_epochs = local_epochs;
        cfg.agent_weights = Vector::Ones(1);
        return fedcore::local_descent(w, data, cfg);
      },
      py::arg("w"), py::arg("data"), py::arg("eta"), py::arg("local_epochs"),
      "Runs local_epochs full-batch gradient steps at rate eta.");

  // --- shift design ------------------------------------------------------
  m.def(
      "make_gamma",
      [](const std::string& scheme, const Vector& delta,
         const std::optional<Vector>& custom_gamma) {
        return shiftdesign::make_gamma(scheme_from(scheme, custom_gamma),
                                       fedcore::Delta{delta, 0, 0});
      },
      py::arg("scheme"), py::arg("delta"), py::arg("custom_gamma") = std::nullopt,
      "Shift coefficients for max|mean|comp|custom given the current delta.");
  m.def("validate_gamma", &shiftdesign::validate_gamma, py::arg("gamma"),
        py::arg("tol") = 1e-10, "True iff gamma is finite and sums to -1.");
  m.def(
      "apply_shift",
      [](const Vector& delta, const Vector& gamma) {
        const auto shifted = shiftdesign::apply_shift(fedcore::Delta{delta, 0, 0}, gamma);
        return py::make_tuple(shifted.values(), shifted.shift_scalar());
      },
      py::arg("delta"), py::arg("gamma"),
      "Returns (delta + (gamma . delta) * ones, gamma . delta).");
  m.def("shift_matrix", &shiftdesign::shift_matrix, py::arg("gamma"),
        "The transformation I + ones gamma^T.");
  m.def(
      "shift_matrix_rank_deficiency",
      [](const Vector& gamma) {
        return shiftdesign::shift_matrix_rank_deficiency(gamma, gamma.size());
      },
      py::arg("gamma"), "d minus the numerical rank of I + ones gamma^T (1 for valid gamma).");
  m.def("free_term_hook", &shiftdesign::free_term_hook, py::arg("g_grad"),
        py::arg("tol") = 1e-10,
        "Validates a free-term gradient: must sum to zero within tol.");

  // --- eavesdropper information ------------------------------------------
  m.def(
      "build_fim",
      [](const Vector& gamma, double h, double sigma) {
        return fim::build_fim(fim::FimContext(gamma, h, sigma));
      },
      py::arg("gamma"), py::arg("h") = 1.0, py::arg("sigma") = 1.0,
      "Eve's Fisher information matrix for a shifted update.");
  m.def(
      "closed_form_eigenvalues",
      [](const Vector& gamma, double h, double sigma) {
        return fim::closed_form_eigenvalues(fim::FimContext(gamma, h, sigma));
      },
      py::arg("gamma"), py::arg("h") = 1.0, py::arg("sigma") = 1.0,
      "Ascending spectrum under the singularity constraint.");
  m.def("is_singular", &fim::is_singular, py::arg("matrix"), py::arg("rel_tol") = 1e-10);
  m.def("det_via_mdl", &fim::det_via_mdl, py::arg("a_diag_value"), py::arg("u"), py::arg("v"),
        "Determinant of a I + U V^T through the matrix determinant lemma.");
  m.def("mdl_decomposition", &fim::mdl_decomposition, py::arg("gamma"),
        "The rank-3 factors (U, V) of the scaled information matrix minus I.");

  // --- adversary -----------------------------------------------------------
  m.def(
      "alpha",
      [](const std::vector<Vector>& deltas, const Vector& weights) {
        std::vector<fedcore::Delta> wrapped;
        wrapped.reserve(deltas.size());
        for (size_t k = 0; k < deltas.size(); ++k) {
          wrapped.push_back(fedcore::Delta{deltas[k], static_cast<int>(k), 0});
        }
        const auto result = adversary::alpha(wrapped, weights);
        return py::make_tuple(result.value, result.degenerate);
      },
      py::arg("deltas"), py::arg("weights"),
      "Alignment ratio (value, degenerate); +inf when the weighted sum vanishes.");
  m.def(
      "tamper_bound",
      [](double epsilon, const std::vector<double>& gamma_norms, int d, double alpha,
         bool homogeneous) {
        return adversary::tamper_bound({epsilon, gamma_norms, alpha, homogeneous}, d);
      },
      py::arg("epsilon"), py::arg("gamma_norms"), py::arg("d"), py::arg("alpha") = 1.0,
      py::arg("homogeneous") = true,
      "Upper bound on Eve's update norm under untampered convergence.");
  m.def("tamper_test", &adversary::tamper_test, py::arg("eve_update_norm"), py::arg("bound"));

  // --- experiments ----------------------------------------------------------
  py::class_<experiment::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("d", &experiment::ExperimentConfig::d)
      .def_readwrite("agents", &experiment::ExperimentConfig::agents)
      .def_readwrite("samples_per_agent", &experiment::ExperimentConfig::samples_per_agent)
      .def_readwrite("label_noise_std", &experiment::ExperimentConfig::label_noise_std)
      .def_readwrite("channel_noise_var", &experiment::ExperimentConfig::channel_noise_var)
      .def_readwrite("eta", &experiment::ExperimentConfig::eta)
      .def_readwrite("local_epochs", &experiment::ExperimentConfig::local_epochs)
      .def_readwrite("rounds", &experiment::ExperimentConfig::rounds)
      .def_readwrite("heterogeneity", &experiment::ExperimentConfig::heterogeneity)
      .def_readwrite("master_seed", &experiment::ExperimentConfig::master_seed)
      .def_property(
          "scheme",
          [](const experiment::ExperimentConfig& cfg) {
            return shiftdesign::scheme_name(cfg.scheme.kind);
          },
          [](experiment::ExperimentConfig& cfg, const std::string& name) {
            cfg.scheme = {shiftdesign::scheme_from_name(name), std::nullopt};
          })
      .def("set_custom_gamma",
           [](experiment::ExperimentConfig& cfg, const Vector& gamma) {
             cfg.scheme = shiftdesign::ShiftScheme::custom(gamma);
             cfg.per_agent_gamma.clear();
           })
      .def("set_per_agent_gamma",
           [](experiment::ExperimentConfig& cfg, const std::vector<Vector>& gammas) {
             cfg.scheme = {shiftdesign::SchemeKind::custom, std::nullopt};
             cfg.per_agent_gamma = gammas;
           })
      .def(
          "set_baseline",
          [](experiment::ExperimentConfig& cfg, const std::string& kind, double value) {
            baselines::InjectionConfig injection;
            if (kind == "gaussian") {
              injection.kind = baselines::InjectionKind::gaussian;
              injection.beta_sq = value;
            } else if (kind == "laplace") {
              injection.kind = baselines::InjectionKind::laplace;
              injection.lambda = std::sqrt(value);
            } else {
              throw ConfigError("baseline kind must be gaussian or laplace");
            }
            cfg.baseline = injection;
          },
          py::arg("kind"), py::arg("value"),
          "Configure noise injection; value is beta^2 (gaussian) or lambda^2 (laplace).")
      .def("clear_baseline",
           [](experiment::ExperimentConfig& cfg) { cfg.baseline.reset(); })
      .def("validate", &experiment::ExperimentConfig::validate)
      .def("w_star", &experiment::ExperimentConfig::w_star)
      .def_static("from_json", &experiment::parse_config_json, py::arg("text"),
                  "Parse the flat JSON configuration document.");

  m.def("generate_data", &experiment::generate_data, py::arg("config"),
        "Synthetic per-agent regression datasets, deterministic per seed.");
  m.def(
      "run_experiment",
      [](const experiment::ExperimentConfig& cfg) {
        return run_result_to_dict(experiment::run_experiment(cfg));
      },
      py::arg("config"),
      "Full protocol run; returns {'trace': columns, 'summary': dict, 'trace_csv': str}.");
  m.def(
      "run_experiment",
      [](const experiment::ExperimentConfig& cfg,
         const std::vector<fedcore::LocalDataset>& data) {
        return run_result_to_dict(experiment::run_experiment(cfg, data));
      },
      py::arg("config"), py::arg("data"),
      "Run with pre-generated datasets (several mechanisms sharing one seed).");
}
