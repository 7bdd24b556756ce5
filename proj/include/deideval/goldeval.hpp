#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deideval/corpus.hpp"
#include "deideval/extraction.hpp"
#include "deideval/normalizer.hpp"

namespace deideval {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // exact harmonic mean of precision and recall, 0 when both 0
  double std_precision = 0.0;
  double std_recall = 0.0;
  double std_f1 = 0.0;
};

struct Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

struct MatchReport {
  std::int64_t true_positives = 0;
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
  // (prediction index, gold index); one-to-one.
  std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;
};

// Greedy one-to-one matching in prediction order: each prediction takes the
// first unmatched gold entity it is equivalent to.
MatchReport match(const std::vector<Prediction>& predictions,
                  const std::vector<GoldEntity>& gold, const Normalizer& normalizer);

struct GoldScore {
  PRF overall;                            // micro (pooled counts)
  std::map<PhiCategory, PRF> per_category;
  PRF macro;                              // mean of per-note P/R/F1 (report extra)
  Counts counts;
  std::map<PhiCategory, Counts> per_category_counts;
};

// Micro-averaged supervised score of one model's prediction run (note_id →
// PredictionSet) against the corpus gold. Throws NoGoldAnnotations.
GoldScore score(const Corpus& corpus, const std::map<std::string, PredictionSet>& run,
                const Normalizer& normalizer);

// Nonparametric bootstrap over notes: fills the std_* fields of a score.
// Deterministic for a given seed; per-resample streams derive from it.
GoldScore bootstrap_std(const Corpus& corpus, const std::map<std::string, PredictionSet>& run,
                        const Normalizer& normalizer, int resamples = 1000,
                        std::uint64_t seed = 20240315);

}  // namespace deideval
