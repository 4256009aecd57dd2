// SPDX-License-Identifier: Apache-2.0
#include "deepforge/curation/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <spdlog/spdlog.h>

#include "deepforge/common/rng.hpp"
#include "deepforge/datamodel/transcript.hpp"

namespace deepforge {

void LogProbSeq::validate() const {
  if (values.size() != mask.size()) {
    throw PreconditionError("log-prob sequence has " + std::to_string(values.size()) + " values but " +
                            std::to_string(mask.size()) + " mask entries");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw NonFiniteInput("log-prob " + std::to_string(i) + " is not finite");
    if (values[i] > 0) throw PreconditionError("log-prob " + std::to_string(i) + " is positive");
  }
}

double LogProbSeq::masked_sum() const {
  double sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i]) sum += values[i];
  }
  return sum;
}

LogProbSeq LogProbSeq::concat(const LogProbSeq& a, const LogProbSeq& b) {
  LogProbSeq out = a;
  out.values.insert(out.values.end(), b.values.begin(), b.values.end());
  out.mask.insert(out.mask.end(), b.mask.begin(), b.mask.end());
  return out;
}

double sft_nll(const LogProbSeq& seq) {
  seq.validate();
  if (std::find(seq.mask.begin(), seq.mask.end(), true) == seq.mask.end()) {
    spdlog::warn("EmptyMask: no position contributes to the loss");
    return 0.0;
  }
  // -0.0 would print as "-0"
  return 0.0 - seq.masked_sum();
}

double softplus(double x) noexcept {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_ratio(const DpoSide& side) { return side.policy_lp - side.ref_lp; }

DpoResult dpo_loss(const DpoSide& chosen, const DpoSide& rejected, double beta) {
  for (double v : {chosen.policy_lp, chosen.ref_lp, rejected.policy_lp, rejected.ref_lp, beta}) {
    if (!std::isfinite(v)) throw NonFiniteInput("DPO inputs must be finite");
  }
  if (!(beta > 0)) throw PreconditionError("beta must be > 0");
  const double margin = log_ratio(chosen) - log_ratio(rejected);
  if (!std::isfinite(margin)) throw NonFiniteInput("log-ratio margin overflowed");
  return {softplus(-beta * margin), margin};
}

double dpo_loss_grad(double margin, double beta) { return -beta * sigmoid(-beta * margin); }

std::vector<bool> trajectory_loss_mask(const Trajectory& t, const Tokenizer& tok, LossMask mode) {
  std::vector<bool> mask;
  for (const auto& m : t.messages) {
    const bool in_loss = mode == LossMask::All || m.role != Role::Tool;
    mask.insert(mask.end(), tok.count(render_segments(m)), in_loss);
  }
  return mask;
}

std::vector<LossCheck> run_loss_checks(std::uint64_t seed) {
  std::vector<LossCheck> out;
  auto check = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };

  {
    const double l = dpo_loss({-3.0, -4.0}, {-5.0, -6.0}, 0.5).loss;
    check("dpo zero margin", std::abs(l - std::numbers::ln2) <= 1e-9, "loss " + fmt(l) + ", want ln 2");
  }
  {
    const double ln3 = std::log(3.0);
    const double l = dpo_loss({ln3 - 2.0, -2.0}, {-1.0, -1.0}, 1.0).loss;
    const double want = -std::log(0.75);
    check("dpo beta=1 margin=ln3", std::abs(l - want) <= 1e-9, "loss " + fmt(l) + ", want " + fmt(want));
  }
  {
    const double l = dpo_loss({-50.0, 0.0}, {0.0, 0.0}, 0.1).loss;
    check("dpo beta=0.1 margin=-50", std::abs(l - 5.006715348489118) <= 1e-12, "loss " + fmt(l));
  }
  {
    Rng rng(seed);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const double m = -10.0 + 20.0 * rng.uniform();
      const double beta = 0.1 + 1.9 * rng.uniform();
      const double h = 1e-4;
      const double fd = (softplus(-beta * (m + h)) - softplus(-beta * (m - h))) / (2 * h);
      const double g = dpo_loss_grad(m, beta);
      worst = std::max(worst, std::abs(fd - g) / std::abs(g));
    }
    check("dpo gradient vs central differences (20 points)", worst <= 1e-6, "worst relative error " + fmt(worst));
  }
  {
    bool ok = true;
    double prev = INFINITY;
    for (int i = -200; i <= 200; ++i) {
      const double l = dpo_loss({0.1 * i, 0.0}, {0.0, 0.0}, 0.7).loss;
      ok = ok && l < prev;
      prev = l;
    }
    check("dpo strictly decreasing in margin", ok, "grid of 401 margins in [-20, 20]");
  }
  {
    const double hi = dpo_loss({1e4, 0.0}, {0.0, 0.0}, 1.0).loss;
    const double lo = dpo_loss({-1e4, 0.0}, {0.0, 0.0}, 1.0).loss;
    check("dpo margin +1e4 finite", std::isfinite(hi) && hi >= 0 && hi < 1e-300, "loss " + fmt(hi));
    check("dpo margin -1e4 finite", std::isfinite(lo) && std::abs(lo - 1e4) <= 1e-9, "loss " + fmt(lo));
  }
  {
    const DpoSide a{-3.5, -4.0}, b{-6.0, -5.25};
    const double m1 = dpo_loss(a, b, 1.0).margin;
    const double m2 = dpo_loss(b, a, 1.0).margin;
    check("dpo swap negates margin", m1 == -m2, "margins " + fmt(m1) + " and " + fmt(m2));
  }
  {
    const double half = std::log(0.5);
    const double nll = sft_nll({{half, half}, {true, true}});
    check("sft nll two ln(1/2) tokens", std::abs(nll - 2 * std::numbers::ln2) <= 1e-12, "nll " + fmt(nll));
    check("sft nll certainty", sft_nll({{0.0, 0.0, 0.0}, {true, true, true}}) == 0.0, "all masked values 0");
    const LogProbSeq x{{-0.25, -1.5, -0.125}, {true, false, true}};
    const LogProbSeq y{{-2.0, -0.5}, {false, true}};
    const double sum = sft_nll(x) + sft_nll(y);
    const double joint = sft_nll(LogProbSeq::concat(x, y));
    check("sft nll additive over concatenation", std::abs(sum - joint) <= 1e-12, fmt(joint) + " vs " + fmt(sum));
  }
  return out;
}

}  // namespace deepforge
