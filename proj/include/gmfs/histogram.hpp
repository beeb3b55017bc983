#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gmfs {

/// Finite alphabet. A product alphabet S x A stores cell (s, a) at s * |A| + a.
class Alphabet {
 public:
  explicit Alphabet(std::size_t size, std::vector<std::string> labels = {});
  static Alphabet product(std::size_t n_states, std::size_t n_actions);

  std::size_t size() const { return size_; }
  bool is_product() const { return n_actions_ > 0; }
  std::size_t n_states() const;
  std::size_t n_actions() const;
  const std::vector<std::string>& labels() const { return labels_; }

  bool operator==(const Alphabet& other) const {
    return size_ == other.size_ && n_actions_ == other.n_actions_;
  }

 private:
  std::size_t size_ = 0;
  std::size_t n_actions_ = 0;  // 0 means "not a product"
  std::vector<std::string> labels_;
};

/// Empirical pmf with integer counts summing exactly to kappa.
class Histogram {
 public:
  Histogram(Alphabet alphabet, std::vector<std::uint32_t> counts);

  const Alphabet& alphabet() const { return alphabet_; }
  std::uint32_t kappa() const { return kappa_; }
  std::span<const std::uint32_t> counts() const { return counts_; }
  std::uint32_t count(std::size_t cell) const { return counts_.at(cell); }
  double probability(std::size_t cell) const {
    return static_cast<double>(counts_.at(cell)) / kappa_;
  }
  std::vector<double> pmf() const;

  bool operator==(const Histogram& other) const {
    return alphabet_ == other.alphabet_ && counts_ == other.counts_;
  }

 private:
  Alphabet alphabet_;
  std::vector<std::uint32_t> counts_;
  std::uint32_t kappa_ = 0;
};

enum class Axis { kState, kAction };

/// Sums a joint S x A histogram along the collapsed axis.
Histogram marginal(const Histogram& joint, Axis keep = Axis::kState);

/// Half the l1 distance. Both arguments must have the same length.
double tv_distance(std::span<const double> p, std::span<const double> q);
double tv_distance(const Histogram& p, const Histogram& q);
double tv_distance(const Histogram& p, std::span<const double> q);

/// C(n, k) in 64 bits; throws OverflowError instead of wrapping.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Number of histograms with denominator kappa over `alphabet_size` cells,
/// C(kappa + alphabet_size - 1, alphabet_size - 1).
std::uint64_t histogram_count(std::size_t alphabet_size, std::uint32_t kappa);

/// Advances `counts` to its colexicographic successor among compositions
/// with the same total. Returns false (and leaves counts unchanged) at the
/// last composition.
bool next_composition(std::span<std::uint32_t> counts);

/// Bijection between histograms with a fixed denominator and [0, total).
///
/// Order is colexicographic on count vectors: the last cell is the most
/// significant digit. For two cells and kappa = 2 the order is
/// (2,0), (1,1), (0,2). Ranking costs O(alphabet_size) via cumulative
/// binomials from a Pascal cache built at construction.
class HistogramIndex {
 public:
  HistogramIndex(std::size_t alphabet_size, std::uint32_t kappa);

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::uint32_t kappa() const { return kappa_; }
  std::uint64_t total() const { return total_; }

  std::uint64_t rank(std::span<const std::uint32_t> counts) const;
  std::uint64_t rank(const Histogram& h) const;
  void unrank(std::uint64_t idx, std::span<std::uint32_t> counts) const;
  std::vector<std::uint32_t> unrank(std::uint64_t idx) const;

 private:
  // C(n, j) for n <= kappa + alphabet_size - 1 and j <= alphabet_size - 1.
  std::uint64_t choose(std::size_t n, std::size_t j) const {
    return pascal_[n * alphabet_size_ + j];
  }

  std::size_t alphabet_size_;
  std::uint32_t kappa_;
  std::uint64_t total_;
  std::vector<std::uint64_t> pascal_;
};

/// All histograms with the given denominator, in rank order.
std::vector<Histogram> enumerate_histograms(const Alphabet& alphabet, std::uint32_t kappa);
std::vector<Histogram> enumerate_histograms(std::size_t alphabet_size, std::uint32_t kappa);

/// Joint histograms over S x A whose state marginal equals g.
/// Count is prod_s C(g_s + |A| - 1, |A| - 1). Returned in ascending joint rank.
std::vector<Histogram> fiber(const Histogram& g, std::size_t n_actions);

/// Precomputed fibers for every g in G_kappa, as joint ranks.
class FiberIndex {
 public:
  FiberIndex(std::size_t n_states, std::size_t n_actions, std::uint32_t kappa);

  const HistogramIndex& joint() const { return joint_; }
  const HistogramIndex& marginal() const { return marginal_; }
  /// Joint ranks in fiber(g), ascending.
  std::span<const std::uint64_t> fiber_of(std::uint64_t marginal_rank) const;
  /// Rank of the state marginal of a joint histogram.
  std::uint64_t marginal_of(std::uint64_t joint_rank) const { return marginal_of_[joint_rank]; }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  HistogramIndex joint_;
  HistogramIndex marginal_;
  std::vector<std::uint64_t> marginal_of_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint64_t> members_;
};

}  // namespace gmfs
