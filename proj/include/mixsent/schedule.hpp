// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <stdexcept>
#include <vector>

namespace mixsent {

struct StepOutOfRange : std::runtime_error {
    explicit StepOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

// Slanted-triangular learning-rate shape plus the discriminative per-group
// factor. `stlr_enabled`/`discr_enabled` exist for the ablation harness;
// with both off (and unfreezing off) fine-tuning degenerates to constant-lr
// training of the whole network.
struct ScheduleConfig {
    double lr_max = 3e-3;
    double cut_frac = 0.1;      // warm-up fraction, in (0,1)
    double ratio = 32.0;        // peak-to-floor ratio, > 1
    double discr_factor = 2.6;  // per-group decay, >= 1
    long total_steps = 1;

    bool stlr_enabled = true;
    bool discr_enabled = true;

    void validate() const;
    long cut() const;  // floor(total_steps * cut_frac), clamped to >= 1
};

// lr(t) = lr_max * (1 + p * (ratio - 1)) / ratio with
// p = t/cut while warming up, then 1 - (t-cut)/(cut * (1/cut_frac - 1)).
double stlr(long t, const ScheduleConfig& cfg);

// Geometric decay from the head group downward: lr[0] = lr_top,
// lr[g] = lr[g-1] / factor. Head-first order, one entry per group.
std::vector<double> discriminative_lrs(double lr_top, double factor, int n_groups);

// Gradual unfreezing: groups 0..min(epoch, n_groups-1) train, everything
// deeper stays frozen. Head-first group order.
std::set<int> frozen_groups(int epoch, int n_groups);

}  // namespace mixsent
