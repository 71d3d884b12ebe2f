// SPDX-License-Identifier: Apache-2.0
#include "mixsent/schedule.hpp"

#include <cmath>
#include <string>

namespace mixsent {

void ScheduleConfig::validate() const {
    if (!(lr_max > 0.0)) throw std::invalid_argument("schedule: lr_max must be positive");
    if (!(cut_frac > 0.0 && cut_frac < 1.0)) {
        throw std::invalid_argument("schedule: cut_frac must be in (0,1)");
    }
    if (!(ratio > 1.0)) throw std::invalid_argument("schedule: ratio must be > 1");
    if (!(discr_factor >= 1.0)) throw std::invalid_argument("schedule: discr_factor must be >= 1");
    if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be positive");
}

long ScheduleConfig::cut() const {
    // clamped so that very short runs still get a one-step warm-up
    return std::max<long>(
        1, static_cast<long>(std::floor(static_cast<double>(total_steps) * cut_frac)));
}

double stlr(long t, const ScheduleConfig& cfg) {
    cfg.validate();
    if (t < 0 || t > cfg.total_steps) {
        throw StepOutOfRange("stlr: step " + std::to_string(t) + " outside [0," +
                             std::to_string(cfg.total_steps) + "]");
    }
    const double cut = static_cast<double>(cfg.cut());
    const double td = static_cast<double>(t);
    const double p = td < cut ? td / cut : 1.0 - (td - cut) / (cut * (1.0 / cfg.cut_frac - 1.0));
    return cfg.lr_max * (1.0 + p * (cfg.ratio - 1.0)) / cfg.ratio;
}

std::vector<double> discriminative_lrs(double lr_top, double factor, int n_groups) {
    if (n_groups < 1) throw std::invalid_argument("discriminative_lrs: n_groups must be >= 1");
    if (!(factor >= 1.0)) throw std::invalid_argument("discriminative_lrs: factor must be >= 1");
    std::vector<double> lrs(static_cast<std::size_t>(n_groups));
    lrs[0] = lr_top;
    for (std::size_t g = 1; g < lrs.size(); ++g) lrs[g] = lrs[g - 1] / factor;
    return lrs;
}

std::set<int> frozen_groups(int epoch, int n_groups) {
    if (epoch < 0) throw std::invalid_argument("frozen_groups: epoch must be >= 0");
    if (n_groups < 1) throw std::invalid_argument("frozen_groups: n_groups must be >= 1");
    std::set<int> frozen;
    const int last_trainable = std::min(epoch, n_groups - 1);
    for (int g = last_trainable + 1; g < n_groups; ++g) frozen.insert(g);
    return frozen;
}

}  // namespace mixsent
