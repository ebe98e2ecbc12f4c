#pragma once

#include <cstdint>
#include <vector>

#include "ua/markov.hpp"
#include "ua/model.hpp"
#include "ua/run_result.hpp"
#include "ua/rng.hpp"
#include "ua/utility.hpp"

namespace ua {

struct FrameParams {
  double epsilon = 0.1;  // in [0, 1)
  double z = 0.0;        // > number of users
  int history = 2;       // K: depth of the frame history
  int frame_len = 1;     // L: slots per frame
  double delta = 0.05;   // tolerance of the frame-average repeat test
  std::uint64_t seed = 1;

  void validate(int num_users) const;
};

struct FrameParamChoice {
  int frame_len = 1;
  double delta = 0.0;
  // delta >= 1 makes the repeat test vacuous at this epsilon; flagged, not
  // rejected (callers may still want the L part).
  bool vacuous = false;
};

// L = ceil(1/eps) and delta = sqrt(c2 log(1/eps) / L), so that
// L delta^2 >= c2 log(1/eps) holds by construction. c2 <= 0 selects the
// default 2z.
FrameParamChoice choose_frame_params_iid(double epsilon, double z, double c2 = 0.0);

// Same shape with the constant z (1 - lambda_min) / (1 + lambda_min) from
// the Markov-chain Hoeffding bound, where lambda_min bounds the SLEM of
// every induced chain.
FrameParamChoice choose_frame_params_markov(double epsilon, double z, double lambda_min);

enum class FrameVariant {
  kIidAction,      // per-frame AP choice, iid state
  kMarkovControl,  // per-frame stationary control, controlled Markov state
};

// Frame-granularity content/discontent agent. The visible world is the
// agent's own choice set (AP positions, or control indices in the Markov
// variant), its last K (choice, frame-average rate) pairs and q.
class FrameAgent {
 public:
  FrameAgent(int num_choices, UtilityFn utility, const FrameParams& params, RngStream rng);

  int choose();
  void observe(int choice, double frame_average);

  int q() const { return q_; }
  int choice_ago(int j) const;        // j in {1, .., K}
  double average_ago(int j) const;

  // Overwrite the bounded frame history (oldest first) and mood.
  void reset_history(std::span<const int> choices, std::span<const double> averages, int q);

 private:
  int num_choices_;
  UtilityFn utility_;
  double epsilon_;
  double explore_prob_;
  double log_epsilon_;
  int history_;
  double delta_;
  RngStream rng_;
  std::vector<int> past_choices_;
  std::vector<double> past_averages_;
  int head_ = 0;
  int q_ = 0;
};

// Runs the frame dynamics for `horizon` frames. The slot column of the
// result carries frame index x L so curves overlay with the slot-level
// algorithms. The model variant must match: IidPerAction for kIidAction,
// ControlledMarkov for kMarkovControl.
RunResult run_frame(const NetworkModel& model, const UtilityProfile& utility,
                    const FrameParams& params, FrameVariant variant, std::int64_t horizon_frames,
                    const TraceOptions& opts = {}, int initial_state = 0);

}  // namespace ua
