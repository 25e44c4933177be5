#include "modshift/channel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "modshift/errors.hpp"

namespace modshift::channel {

void ChannelParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("channel gain h must be positive and finite");
  }
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw ConfigError("channel noise level sigma must be nonnegative and finite");
  }
}

void SecretLedger::record(int agent_id, int round, long scalars) {
  counts_[{round, agent_id}] += scalars;
  total_ += scalars;
}

long SecretLedger::for_agent_round(int agent_id, int round) const {
  const auto it = counts_.find({round, agent_id});
  return it == counts_.end() ? 0 : it->second;
}

long SecretLedger::for_round(int round) const {
  long sum = 0;
  for (auto it = counts_.lower_bound({round, std::numeric_limits<int>::min()});
       it != counts_.end() && it->first.first == round; ++it) {
    sum += it->second;
  }
  return sum;
}

Vector transmit(const Vector& payload, const ChannelParams& params, NoiseStream& noise) {
  params.validate();
  if (!payload.allFinite()) {
    throw ConfigError("channel payload must be finite");
  }
  if (params.sigma == 0.0) {
    return payload;
  }
  return payload + noise.gaussian_vector(payload.size(), params.noise_stddev());
}

Vector eve_observe(const shiftdesign::ShiftedDelta& shifted, const ChannelParams& params,
                   NoiseStream& noise) {
  if (params.receiver != Receiver::eve) {
    throw UsageError("eve_observe requires an Eve channel");
  }
  return transmit(shifted.values(), params, noise);
}

Vector bob_receive_and_compensate(const shiftdesign::ShiftedDelta& shifted,
                                  double shift_scalar_from_secret_channel,
                                  const ChannelParams& params, NoiseStream& noise,
                                  SecretLedger& ledger) {
  if (params.receiver != Receiver::bob) {
    throw UsageError("bob_receive_and_compensate requires a Bob channel");
  }
  // The secret channel is ideal, so the delivered scalar must be the one the
  // agent applied.
  if (!(shift_scalar_from_secret_channel == shifted.shift_scalar())) {
    throw ProtocolError("secret-channel scalar does not match the applied shift (agent " +
                        std::to_string(shifted.agent_id()) + ")");
  }
  ledger.record(shifted.agent_id(), shifted.round(), 1);
  // (shifted + z) - scalar * ones cancels the shift term exactly; transmit the
  // retained pre-shift delta rather than re-rounding the subtraction.
  return transmit(shifted.original(), params, noise);
}

}  // namespace modshift::channel
