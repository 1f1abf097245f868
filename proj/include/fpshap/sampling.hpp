#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fpshap/coalition.hpp"
#include "fpshap/errors.hpp"
#include "fpshap/kernel.hpp"
#include "fpshap/rng.hpp"
#include "fpshap/wallenius.hpp"

// Coalitions are stratified by size and sampled in complement pairs: whenever
// a coalition is drawn its complement joins the sample too. Strata are
// therefore defined at the pair level. The representative of a pair is the
// smaller-size coalition; for even p the middle stratum is split by the
// canonical rule "representative contains feature 0", so a mask and its
// complement can never both be representatives.

namespace fpshap {

struct PairStratum {
  int representative_size = 0;  // |S| of the representative
  bool middle = false;          // even-p stratum of size p/2
  std::uint64_t pair_count = 0; // pairs in the population
  double pair_weight = 0.0;     // k(p, s) + k(p, p - s)
};

struct PairingStructure {
  int p = 0;
  std::vector<PairStratum> strata;  // ascending representative size

  static PairingStructure build(int feature_count,
                                double anchor_weight = kDefaultAnchorWeight) {
    if (feature_count < 2) {
      throw ArgumentError("PairingStructure: need at least 2 features");
    }
    if (feature_count > kMaxFeatures) {
      throw ArgumentError("PairingStructure: too many features for the mask width");
    }
    PairingStructure out;
    out.p = feature_count;
    for (int s = 1; 2 * s <= feature_count; ++s) {
      PairStratum st;
      st.representative_size = s;
      st.middle = (2 * s == feature_count);
      st.pair_count = st.middle ? binomial(feature_count - 1, s - 1)
                                : binomial(feature_count, s);
      st.pair_weight = kernel_weight(feature_count, s, anchor_weight) +
                       kernel_weight(feature_count, feature_count - s,
                                     anchor_weight);
      out.strata.push_back(st);
    }
    return out;
  }

  // The pair partner is always the complement.
  CoalitionMask pair_of(const CoalitionMask& mask) const {
    return mask.complement();
  }

  bool is_representative(const CoalitionMask& mask) const {
    const int s = mask.size();
    if (s == 0 || s == p) return false;
    if (2 * s < p) return true;
    if (2 * s > p) return false;
    return mask.contains(0);
  }

  // rank -> representative mask within a stratum, lexicographic.
  CoalitionMask representative_at(std::size_t stratum_index,
                                  std::uint64_t rank) const {
    const PairStratum& st = strata.at(stratum_index);
    if (rank >= st.pair_count) {
      throw ArgumentError("representative_at: rank out of range");
    }
    if (!st.middle) {
      return CoalitionMask(unrank_subset(rank, p, st.representative_size), p);
    }
    // Middle stratum: subsets of {1..p-1} of size p/2 - 1, plus feature 0.
    const std::uint32_t rest =
        unrank_subset(rank, p - 1, st.representative_size - 1);
    return CoalitionMask((rest << 1) | 1u, p);
  }
};

struct PlannedStratum {
  int representative_size = 0;
  std::uint64_t population_pairs = 0;   // m_s
  std::uint64_t pairs_to_draw = 0;      // x_s
  double expected_pairs = 0.0;          // mu_s before rounding
  double inclusion_probability = 0.0;   // x_s / m_s
};

struct SamplingPlan {
  int p = 0;
  std::uint64_t n_total = 0;  // coalition budget including both anchors
  double anchor_weight = kDefaultAnchorWeight;
  std::vector<PlannedStratum> strata;

  std::uint64_t sampled_pairs() const {
    std::uint64_t total = 0;
    for (const auto& st : strata) total += st.pairs_to_draw;
    return total;
  }
};

// Allocates the coalition budget across size strata with the expected counts
// of a Wallenius urn built at pair level: m = pairs per stratum, per-pair
// weight = summed kernel weight of the two members, n = (n_total - 2) / 2.
inline SamplingPlan plan_sample(int feature_count, std::uint64_t n_total,
                                double anchor_weight = kDefaultAnchorWeight,
                                RoundingMode rounding =
                                    RoundingMode::kLargestRemainder) {
  const PairingStructure pairing =
      PairingStructure::build(feature_count, anchor_weight);
  if (n_total < 4 || (n_total - 2) % 2 != 0) {
    throw ArgumentError(
        "plan_sample: budget minus the two anchors must be even and positive");
  }
  if (feature_count <= kMaxEnumerationFeatures &&
      n_total > (std::uint64_t{1} << feature_count)) {
    throw ArgumentError("plan_sample: budget exceeds 2^p coalitions");
  }

  UrnSpec urn;
  for (const auto& st : pairing.strata) {
    urn.items.push_back(static_cast<std::int64_t>(st.pair_count));
    urn.weights.push_back(st.pair_weight);
  }
  urn.draws = static_cast<std::int64_t>((n_total - 2) / 2);
  if (urn.draws > urn.total_items()) {
    throw ArgumentError("plan_sample: budget exceeds the pair population");
  }
  const Allocation alloc = allocate_integer(urn, rounding);

  SamplingPlan plan;
  plan.p = feature_count;
  plan.n_total = n_total;
  plan.anchor_weight = anchor_weight;
  for (std::size_t i = 0; i < pairing.strata.size(); ++i) {
    PlannedStratum st;
    st.representative_size = pairing.strata[i].representative_size;
    st.population_pairs = pairing.strata[i].pair_count;
    st.pairs_to_draw = static_cast<std::uint64_t>(alloc.x[i]);
    st.expected_pairs = alloc.mu[i];
    st.inclusion_probability =
        static_cast<double>(st.pairs_to_draw) /
        static_cast<double>(st.population_pairs);
    plan.strata.push_back(st);
  }
  return plan;
}

// One sampled pair: the representative, its complement, and the stratum's
// first-order inclusion probability shared by both members.
struct SampledPair {
  CoalitionMask representative;
  CoalitionMask partner;
  int stratum = 0;
  double inclusion_probability = 1.0;
};

struct SampledStratum {
  int representative_size = 0;
  std::uint64_t population_pairs = 0;
  std::uint64_t drawn_pairs = 0;
  double inclusion_probability = 0.0;
  std::size_t first_pair = 0;  // offset into CoalitionSample::pairs
};

// The realized without-replacement sample. The two anchors (empty and grand
// coalitions, inclusion probability 1, anchor weight) are implicit members of
// every sample built by draw_sample.
struct CoalitionSample {
  int p = 0;
  double anchor_weight = kDefaultAnchorWeight;
  bool with_anchors = true;
  std::vector<SampledStratum> strata;
  std::vector<SampledPair> pairs;  // grouped by stratum, ascending size

  std::uint64_t coalition_count() const {
    return 2 * pairs.size() + (with_anchors ? 2 : 0);
  }
};

// Simple random sampling without replacement of x_s pairs within each
// stratum, independent across strata. Deterministic given the seed.
inline CoalitionSample draw_sample(const SamplingPlan& plan,
                                   const PairingStructure& pairing,
                                   std::uint64_t seed) {
  if (pairing.p != plan.p || pairing.strata.size() != plan.strata.size()) {
    throw ArgumentError("draw_sample: plan and pairing disagree");
  }
  CoalitionSample sample;
  sample.p = plan.p;
  sample.anchor_weight = plan.anchor_weight;
  sample.with_anchors = true;
  Rng rng(seed);
  for (std::size_t i = 0; i < plan.strata.size(); ++i) {
    const PlannedStratum& st = plan.strata[i];
    SampledStratum drawn;
    drawn.representative_size = st.representative_size;
    drawn.population_pairs = st.population_pairs;
    drawn.drawn_pairs = st.pairs_to_draw;
    drawn.inclusion_probability = st.inclusion_probability;
    drawn.first_pair = sample.pairs.size();
    const std::vector<std::uint64_t> ranks = sample_without_replacement(
        st.population_pairs, st.pairs_to_draw, rng);
    for (const std::uint64_t rank : ranks) {
      SampledPair pair;
      pair.representative = pairing.representative_at(i, rank);
      pair.partner = pairing.pair_of(pair.representative);
      pair.stratum = static_cast<int>(i);
      pair.inclusion_probability = st.inclusion_probability;
      sample.pairs.push_back(pair);
    }
    sample.strata.push_back(drawn);
  }
  return sample;
}

// Classic with-replacement comparison arm: pairs drawn with probability
// proportional to their kernel weight, duplicates collapsed into sampling
// frequencies. No inclusion probabilities apply; the frequencies themselves
// act as the least-squares weights.
struct FrequencyEntry {
  CoalitionMask mask;
  std::uint64_t frequency = 0;
};

struct WithReplacementSample {
  int p = 0;
  double anchor_weight = kDefaultAnchorWeight;
  std::uint64_t pair_draws = 0;
  std::vector<FrequencyEntry> entries;  // ascending mask bits, anchors excluded
};

inline WithReplacementSample draw_with_replacement_baseline(
    int feature_count, std::uint64_t n_total, std::uint64_t seed,
    double anchor_weight = kDefaultAnchorWeight) {
  const PairingStructure pairing =
      PairingStructure::build(feature_count, anchor_weight);
  if (n_total < 4 || (n_total - 2) % 2 != 0) {
    throw ArgumentError(
        "draw_with_replacement_baseline: budget minus anchors must be even");
  }
  const std::uint64_t draws = (n_total - 2) / 2;

  // Stratum selection probabilities proportional to total stratum weight;
  // within a stratum every pair is equally weighted.
  std::vector<double> cumulative;
  double total_weight = 0.0;
  for (const auto& st : pairing.strata) {
    total_weight += static_cast<double>(st.pair_count) * st.pair_weight;
    cumulative.push_back(total_weight);
  }

  Rng rng(seed);
  std::map<std::uint32_t, std::uint64_t> freq;
  for (std::uint64_t d = 0; d < draws; ++d) {
    const double u = rng.next_double() * total_weight;
    std::size_t stratum = 0;
    while (stratum + 1 < cumulative.size() && u >= cumulative[stratum]) {
      ++stratum;
    }
    const std::uint64_t rank =
        rng.below(pairing.strata[stratum].pair_count);
    const CoalitionMask rep = pairing.representative_at(stratum, rank);
    ++freq[rep.bits()];
    ++freq[pairing.pair_of(rep).bits()];
  }

  WithReplacementSample sample;
  sample.p = feature_count;
  sample.anchor_weight = anchor_weight;
  sample.pair_draws = draws;
  for (const auto& [bits, count] : freq) {
    sample.entries.push_back({CoalitionMask(bits, feature_count), count});
  }
  return sample;
}

}  // namespace fpshap
