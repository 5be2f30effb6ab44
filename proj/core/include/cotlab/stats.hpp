#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cotlab/data.hpp"

namespace cotlab::stats {

// Aligned correctness vectors over identical (example id, seed) keys.
struct PairedOutcomes {
  std::vector<bool> x_correct;
  std::vector<bool> y_correct;
  std::size_t excluded = 0;  // pairs dropped because either side errored

  std::size_t size() const { return x_correct.size(); }
};

// Joins two record sets on (example id, seed). The key multisets must match;
// pairs where either side carries an error flag are excluded and counted.
PairedOutcomes pair_records(const std::vector<data::ConditionRecord>& x,
                            const std::vector<data::ConditionRecord>& y);

struct AccuracySummary {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t abstained = 0;
  std::size_t errored = 0;

  double accuracy() const;  // abstained/errored count as incorrect
};

AccuracySummary summarize(const std::vector<data::ConditionRecord>& records);

// Throws std::invalid_argument on empty input.
double accuracy(const std::vector<data::ConditionRecord>& records);

inline constexpr double kDegenerateGapEpsilon = 0.005;

// (acc_n - acc_ws) / (acc_ceiling - acc_ws); nullopt when the denominator is
// smaller than kDegenerateGapEpsilon in magnitude. Values outside [0,1] are
// reported as-is.
std::optional<double> gap_recovery(double acc_n, double acc_ws, double acc_ceiling);

enum class CeilingKind { CoT, SS };

struct GrPoint {
  double accuracy = 0.0;
  std::optional<double> gr;
};

struct GrCurve {
  std::string dataset;
  std::string config;
  double acc_ws = 0.0;
  double acc_ceiling = 0.0;
  CeilingKind ceiling = CeilingKind::CoT;
  std::map<std::size_t, GrPoint> points;  // n -> (accuracy, GR)
};

GrCurve build_gr_curve(std::string dataset, std::string config, double acc_ws,
                       double acc_ceiling, CeilingKind ceiling,
                       const std::map<std::size_t, double>& accuracy_by_n);

// Smallest stored n whose GR strictly exceeds 0.5; nullopt when none does.
std::optional<std::size_t> critical_window(const GrCurve& curve);

enum class McNemarMethod { Exact, ChiSquareCC };

struct McNemarResult {
  std::size_t b = 0;  // x correct, y wrong
  std::size_t c = 0;  // x wrong, y correct
  double p_value = 1.0;
  McNemarMethod method = McNemarMethod::Exact;
  bool significant = false;  // at alpha = 0.05
};

inline constexpr double kAlpha = 0.05;
inline constexpr std::size_t kExactMethodLimit = 25;  // b + c below this uses the exact test

// Two-sided exact binomial test on the discordant pairs:
// p = min(1, 2 * P(X <= min(b,c))), X ~ Binomial(b+c, 1/2). b + c = 0 gives 1.
double exact_binomial_two_sided_p(std::size_t b, std::size_t c);

// Chi-square with continuity correction, (max(0,|b-c|-1))^2 / (b+c), 1 df.
double chi_square_cc_p(std::size_t b, std::size_t c);

McNemarResult mcnemar_counts(std::size_t b, std::size_t c);
McNemarResult mcnemar(const PairedOutcomes& pairs);

// Fraction of swap-condition records whose prediction equals the swapped-in
// distractor letter. Records must carry swapped_letter.
double follow_swap_rate(const std::vector<data::ConditionRecord>& records);

// Concatenates per-seed record sets; throws IntegrityError when an
// (example id, seed) key appears twice.
std::vector<data::ConditionRecord> pool_seeds(
    const std::vector<std::vector<data::ConditionRecord>>& per_seed);

// "76.5%": one decimal, round half away from zero.
std::string format_percent(double fraction);

}  // namespace cotlab::stats
