// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "deepforge/common/error.hpp"
#include "deepforge/curation/tokenizer.hpp"
#include "deepforge/datamodel/types.hpp"

namespace deepforge {

class NonFiniteInput : public Error {
 public:
  explicit NonFiniteInput(const std::string& detail) : Error("NonFiniteInput", detail) {}
};

/// Per-token log-probabilities and the positions that contribute to a loss.
struct LogProbSeq {
  std::vector<double> values;
  std::vector<bool> mask;

  /// Throws PreconditionError for unequal lengths or positive values and
  /// NonFiniteInput for non-finite values.
  void validate() const;
  double masked_sum() const;
  static LogProbSeq concat(const LogProbSeq& a, const LogProbSeq& b);
};

/// Negative log-likelihood over masked positions; logs EmptyMask when no
/// position is masked in.
double sft_nll(const LogProbSeq& seq);

/// log(1 + e^x) without overflow for large |x|.
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

/// Summed log-probabilities of one trajectory under the policy and the
/// reference model.
struct DpoSide {
  double policy_lp = 0;
  double ref_lp = 0;
};

struct DpoResult {
  double loss = 0;
  double margin = 0;
};

double log_ratio(const DpoSide& side);

/// margin = ratio(chosen) - ratio(rejected); loss = softplus(-beta * margin).
DpoResult dpo_loss(const DpoSide& chosen, const DpoSide& rejected, double beta);

/// d loss / d margin.
double dpo_loss_grad(double margin, double beta);

enum class LossMask { ExcludeToolResponses, All };

/// One entry per token of the rendered trajectory messages (the query is the
/// conditioning input and is not part of the sequence). Tool responses are
/// masked out unless `mode` is All.
std::vector<bool> trajectory_loss_mask(const Trajectory& t, const Tokenizer& tok, LossMask mode);

struct LossCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Numeric self-test of the loss kernels against closed forms, finite
/// differences and overflow limits.
std::vector<LossCheck> run_loss_checks(std::uint64_t seed = 7);

}  // namespace deepforge
