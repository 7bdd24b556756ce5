#include "deideval/goldeval.hpp"

#include <array>
#include <cmath>

#include "deideval/errors.hpp"

namespace deideval {

namespace {

// splitmix64: tiny, well-mixed, and stable across platforms, unlike the
// standard distributions. Good enough to draw bootstrap indices.
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double ratio(std::int64_t num, std::int64_t denom) {
  return denom > 0 ? static_cast<double>(num) / static_cast<double>(denom) : 0.0;
}

PRF prf_from_counts(const Counts& c) {
  PRF prf;
  prf.precision = ratio(c.tp, c.tp + c.fp);
  prf.recall = ratio(c.tp, c.tp + c.fn);
  const double sum = prf.precision + prf.recall;
  prf.f1 = sum > 0.0 ? 2.0 * prf.precision * prf.recall / sum : 0.0;
  return prf;
}

struct NoteCounts {
  Counts overall;
  std::map<PhiCategory, Counts> per_category;
};

// One pass over the corpus: per-note pooled counts in note order, reusable by
// both the point estimate and every bootstrap resample.
std::vector<NoteCounts> per_note_counts(const Corpus& corpus,
                                        const std::map<std::string, PredictionSet>& run,
                                        const Normalizer& normalizer) {
  std::vector<NoteCounts> out;
  out.reserve(corpus.notes().size());
  static const std::vector<Prediction> kNoPredictions;

  for (const auto& note : corpus.notes()) {
    const auto it = run.find(note.id());
    const auto& predictions = it != run.end() ? it->second.predictions : kNoPredictions;

    std::vector<GoldEntity> gold;
    for (const auto* g : corpus.gold_for(note.id())) gold.push_back(*g);

    const MatchReport report = match(predictions, gold, normalizer);

    NoteCounts counts;
    counts.overall.tp = report.true_positives;
    counts.overall.fp = report.false_positives;
    counts.overall.fn = report.false_negatives;

    std::vector<bool> pred_matched(predictions.size(), false);
    std::vector<bool> gold_matched(gold.size(), false);
    for (const auto& [p, g] : report.matched_pairs) {
      pred_matched[p] = true;
      gold_matched[g] = true;
      ++counts.per_category[normalizer.fold_category(predictions[p].category)].tp;
    }
    for (std::size_t p = 0; p < predictions.size(); ++p) {
      if (!pred_matched[p]) {
        ++counts.per_category[normalizer.fold_category(predictions[p].category)].fp;
      }
    }
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (!gold_matched[g]) {
        ++counts.per_category[normalizer.fold_category(gold[g].category)].fn;
      }
    }
    out.push_back(std::move(counts));
  }
  return out;
}

GoldScore score_from_notes(const std::vector<NoteCounts>& notes) {
  GoldScore result;
  std::map<PhiCategory, Counts> pooled;
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;
  std::size_t macro_notes = 0;

  for (const auto& note : notes) {
    result.counts.tp += note.overall.tp;
    result.counts.fp += note.overall.fp;
    result.counts.fn += note.overall.fn;
    for (const auto& [category, c] : note.per_category) {
      pooled[category].tp += c.tp;
      pooled[category].fp += c.fp;
      pooled[category].fn += c.fn;
    }
    if (note.overall.tp + note.overall.fp + note.overall.fn > 0) {
      const PRF note_prf = prf_from_counts(note.overall);
      macro_p += note_prf.precision;
      macro_r += note_prf.recall;
      macro_f1 += note_prf.f1;
      ++macro_notes;
    }
  }

  result.overall = prf_from_counts(result.counts);
  result.per_category_counts = std::move(pooled);
  for (const auto& [category, c] : result.per_category_counts) {
    result.per_category[category] = prf_from_counts(c);
  }
  if (macro_notes > 0) {
    result.macro.precision = macro_p / static_cast<double>(macro_notes);
    result.macro.recall = macro_r / static_cast<double>(macro_notes);
    result.macro.f1 = macro_f1 / static_cast<double>(macro_notes);
  }
  return result;
}

}  // namespace

MatchReport match(const std::vector<Prediction>& predictions,
                  const std::vector<GoldEntity>& gold, const Normalizer& normalizer) {
  MatchReport report;
  std::vector<bool> gold_taken(gold.size(), false);
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (gold_taken[g]) continue;
      if (normalizer.equivalent({predictions[p].category, predictions[p].surface},
                                {gold[g].category, gold[g].surface})) {
        gold_taken[g] = true;
        report.matched_pairs.emplace_back(p, g);
        break;
      }
    }
  }
  report.true_positives = static_cast<std::int64_t>(report.matched_pairs.size());
  report.false_positives = static_cast<std::int64_t>(predictions.size()) - report.true_positives;
  report.false_negatives = static_cast<std::int64_t>(gold.size()) - report.true_positives;
  return report;
}

GoldScore score(const Corpus& corpus, const std::map<std::string, PredictionSet>& run,
                const Normalizer& normalizer) {
  if (!corpus.has_gold()) throw NoGoldAnnotationsError();
  return score_from_notes(per_note_counts(corpus, run, normalizer));
}

GoldScore bootstrap_std(const Corpus& corpus, const std::map<std::string, PredictionSet>& run,
                        const Normalizer& normalizer, int resamples, std::uint64_t seed) {
  if (!corpus.has_gold()) throw NoGoldAnnotationsError();
  if (resamples < 2) throw Error("bootstrap requires at least 2 resamples");

  const auto notes = per_note_counts(corpus, run, normalizer);
  GoldScore result = score_from_notes(notes);
  const std::size_t n = notes.size();
  if (n == 0) return result;

  // Category set is fixed from the full data so every resample produces a
  // value (possibly 0) for every reported category.
  struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    void add(double x) {
      sum += x;
      sum_sq += x * x;
    }
    double sample_std(int count) const {
      const double mean = sum / count;
      const double var = (sum_sq - static_cast<double>(count) * mean * mean) / (count - 1);
      return var > 0.0 ? std::sqrt(var) : 0.0;
    }
  };
  Accumulator acc_p, acc_r, acc_f1;
  std::map<PhiCategory, std::array<Accumulator, 3>> acc_cat;
  for (const auto& [category, unused] : result.per_category) acc_cat[category];

  for (int b = 0; b < resamples; ++b) {
    // Per-resample stream derived from the root seed; resamples are
    // order-independent and could run concurrently.
    std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(b + 1));
    Counts pooled;
    std::map<PhiCategory, Counts> pooled_cat;
    for (std::size_t draw = 0; draw < n; ++draw) {
      const auto& note = notes[splitmix64(state) % n];
      pooled.tp += note.overall.tp;
      pooled.fp += note.overall.fp;
      pooled.fn += note.overall.fn;
      for (const auto& [category, c] : note.per_category) {
        auto& target = pooled_cat[category];
        target.tp += c.tp;
        target.fp += c.fp;
        target.fn += c.fn;
      }
    }
    const PRF sample = prf_from_counts(pooled);
    acc_p.add(sample.precision);
    acc_r.add(sample.recall);
    acc_f1.add(sample.f1);
    for (auto& [category, accs] : acc_cat) {
      const auto it = pooled_cat.find(category);
      const PRF cat_sample = prf_from_counts(it == pooled_cat.end() ? Counts{} : it->second);
      accs[0].add(cat_sample.precision);
      accs[1].add(cat_sample.recall);
      accs[2].add(cat_sample.f1);
    }
  }

  result.overall.std_precision = acc_p.sample_std(resamples);
  result.overall.std_recall = acc_r.sample_std(resamples);
  result.overall.std_f1 = acc_f1.sample_std(resamples);
  for (auto& [category, prf] : result.per_category) {
    prf.std_precision = acc_cat[category][0].sample_std(resamples);
    prf.std_recall = acc_cat[category][1].sample_std(resamples);
    prf.std_f1 = acc_cat[category][2].sample_std(resamples);
  }
  return result;
}

}  // namespace deideval
