#pragma once

#include <map>
#include <utility>

#include "modshift/rng.hpp"
#include "modshift/shiftdesign.hpp"
#include "modshift/types.hpp"

namespace modshift::channel {

enum class Receiver { bob, eve };

/// Per-link flat-fading AWGN parameters. sigma = 0 models the ideal channel.
struct ChannelParams {
  double h = 1.0;
  double sigma = 0.0;
  Receiver receiver = Receiver::bob;

  void validate() const;
  /// Effective per-entry noise standard deviation sigma / h.
  double noise_stddev() const { return sigma / h; }
};

/// Meters secret-channel usage: one scalar per agent per round for shifts,
/// d scalars for noise injection.
class SecretLedger {
 public:
  void record(int agent_id, int round, long scalars);

  long total() const { return total_; }
  long for_agent_round(int agent_id, int round) const;
  long for_round(int round) const;

 private:
  std::map<std::pair<int, int>, long> counts_;  // (round, agent) -> scalars
  long total_ = 0;
};

/// payload + z with independent zero-mean Gaussian entries of variance
/// (sigma/h)^2. sigma = 0 returns the payload unchanged and draws nothing.
Vector transmit(const Vector& payload, const ChannelParams& params, NoiseStream& noise);

/// Eve observes the shifted values through her channel.
Vector eve_observe(const shiftdesign::ShiftedDelta& shifted, const ChannelParams& params,
                   NoiseStream& noise);

/// Bob's received signal after subtracting the secret scalar times ones.
/// Compensation cancels the rank-one shift exactly, so the result is the
/// pre-shift delta through Bob's channel; the ledger is charged one scalar.
Vector bob_receive_and_compensate(const shiftdesign::ShiftedDelta& shifted,
                                  double shift_scalar_from_secret_channel,
                                  const ChannelParams& params, NoiseStream& noise,
                                  SecretLedger& ledger);

}  // namespace modshift::channel
