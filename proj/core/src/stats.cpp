#include "cotlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cotlab/error.hpp"

namespace cotlab::stats {

PairedOutcomes pair_records(const std::vector<data::ConditionRecord>& x,
                            const std::vector<data::ConditionRecord>& y) {
  using Key = std::pair<std::string, std::uint64_t>;
  const auto key_of = [](const data::ConditionRecord& r) {
    return Key{r.example_id, r.seed};
  };
  std::map<Key, const data::ConditionRecord*> by_key;
  for (const auto& r : x) {
    if (!by_key.emplace(key_of(r), &r).second) {
      throw IntegrityError("duplicate (example, seed) key in condition '" + r.condition_label +
                           "': " + r.example_id);
    }
  }
  if (y.size() != x.size()) {
    throw IntegrityError("paired conditions cover different record counts (" +
                         std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  }
  PairedOutcomes out;
  std::map<Key, std::pair<bool, bool>> joined;  // key -> (x correct, y correct)
  for (const auto& r : y) {
    const auto it = by_key.find(key_of(r));
    if (it == by_key.end()) {
      throw IntegrityError("unpaired (example, seed) key: " + r.example_id + "/" +
                           std::to_string(r.seed));
    }
    if (it->second->error || r.error) {
      ++out.excluded;
    } else {
      joined[it->first] = {it->second->correct, r.correct};
    }
    by_key.erase(it);  // a duplicate y key now surfaces as unpaired
  }
  out.x_correct.reserve(joined.size());
  out.y_correct.reserve(joined.size());
  for (const auto& [key, pair] : joined) {
    out.x_correct.push_back(pair.first);
    out.y_correct.push_back(pair.second);
  }
  return out;
}

double AccuracySummary::accuracy() const {
  if (total == 0) throw std::invalid_argument("accuracy undefined on empty record set");
  return static_cast<double>(correct) / static_cast<double>(total);
}

AccuracySummary summarize(const std::vector<data::ConditionRecord>& records) {
  AccuracySummary s;
  s.total = records.size();
  for (const auto& r : records) {
    if (r.correct) ++s.correct;
    if (r.abstain) ++s.abstained;
    if (r.error) ++s.errored;
  }
  return s;
}

double accuracy(const std::vector<data::ConditionRecord>& records) {
  return summarize(records).accuracy();
}

std::optional<double> gap_recovery(double acc_n, double acc_ws, double acc_ceiling) {
  const double gap = acc_ceiling - acc_ws;
  if (std::abs(gap) < kDegenerateGapEpsilon) return std::nullopt;
  return (acc_n - acc_ws) / gap;
}

GrCurve build_gr_curve(std::string dataset, std::string config, double acc_ws,
                       double acc_ceiling, CeilingKind ceiling,
                       const std::map<std::size_t, double>& accuracy_by_n) {
  GrCurve curve;
  curve.dataset = std::move(dataset);
  curve.config = std::move(config);
  curve.acc_ws = acc_ws;
  curve.acc_ceiling = acc_ceiling;
  curve.ceiling = ceiling;
  for (const auto& [n, acc] : accuracy_by_n) {
    curve.points[n] = GrPoint{acc, gap_recovery(acc, acc_ws, acc_ceiling)};
  }
  return curve;
}

std::optional<std::size_t> critical_window(const GrCurve& curve) {
  for (const auto& [n, point] : curve.points) {
    if (point.gr && *point.gr > 0.5) return n;
  }
  return std::nullopt;
}

double exact_binomial_two_sided_p(std::size_t b, std::size_t c) {
  const std::size_t m = b + c;
  if (m == 0) return 1.0;
  const std::size_t k = std::min(b, c);
  long double tail = 0.0L;
  if (m <= 62) {
    // binomial coefficients stay exact in 64-bit integers up to here
    unsigned long long coeff = 1;
    unsigned long long sum = 0;
    for (std::size_t i = 0; i <= k; ++i) {
      sum += coeff;
      if (i < k) coeff = coeff * (m - i) / (i + 1);
    }
    tail = static_cast<long double>(sum) / std::pow(2.0L, static_cast<long double>(m));
  } else {
    // pmf recurrence in extended precision
    const long double logp = -static_cast<long double>(m) * std::log(2.0L);
    long double pmf = std::exp(logp);
    tail = pmf;
    for (std::size_t i = 0; i < k; ++i) {
      pmf *= static_cast<long double>(m - i) / static_cast<long double>(i + 1);
      tail += pmf;
    }
  }
  const long double p = 2.0L * tail;
  return static_cast<double>(p > 1.0L ? 1.0L : p);
}

double chi_square_cc_p(std::size_t b, std::size_t c) {
  const std::size_t m = b + c;
  if (m == 0) return 1.0;
  const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c));
  const double adj = std::max(0.0, diff - 1.0);
  const double x = adj * adj / static_cast<double>(m);
  // upper tail of chi-square with 1 df
  return std::erfc(std::sqrt(x / 2.0));
}

McNemarResult mcnemar_counts(std::size_t b, std::size_t c) {
  McNemarResult result;
  result.b = b;
  result.c = c;
  if (b + c < kExactMethodLimit) {
    result.method = McNemarMethod::Exact;
    result.p_value = exact_binomial_two_sided_p(b, c);
  } else {
    result.method = McNemarMethod::ChiSquareCC;
    result.p_value = chi_square_cc_p(b, c);
  }
  result.significant = result.p_value < kAlpha;
  return result;
}

McNemarResult mcnemar(const PairedOutcomes& pairs) {
  std::size_t b = 0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs.x_correct[i] && !pairs.y_correct[i]) ++b;
    if (!pairs.x_correct[i] && pairs.y_correct[i]) ++c;
  }
  return mcnemar_counts(b, c);
}

double follow_swap_rate(const std::vector<data::ConditionRecord>& records) {
  if (records.empty()) throw std::invalid_argument("follow_swap_rate on empty record set");
  std::size_t followed = 0;
  for (const auto& r : records) {
    if (!r.swapped_letter) {
      throw std::invalid_argument("follow_swap_rate: record " + r.example_id +
                                  " has no swapped letter");
    }
    if (r.predicted && *r.predicted == *r.swapped_letter) ++followed;
  }
  return static_cast<double>(followed) / static_cast<double>(records.size());
}

std::vector<data::ConditionRecord> pool_seeds(
    const std::vector<std::vector<data::ConditionRecord>>& per_seed) {
  std::vector<data::ConditionRecord> pooled;
  std::map<std::pair<std::string, std::uint64_t>, bool> seen;
  for (const auto& records : per_seed) {
    for (const auto& r : records) {
      if (!seen.emplace(std::make_pair(r.example_id, r.seed), true).second) {
        throw IntegrityError("duplicate (example, seed) key while pooling: " + r.example_id +
                             "/" + std::to_string(r.seed));
      }
      pooled.push_back(r);
    }
  }
  return pooled;
}

std::string format_percent(double fraction) {
  const long long tenths = std::llround(fraction * 1000.0);  // half away from zero
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%lld%%", tenths / 10, std::llabs(tenths % 10));
  return std::string(buf);
}

}  // namespace cotlab::stats
