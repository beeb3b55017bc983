#include "gmfs/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "gmfs/errors.hpp"

namespace gmfs {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

}  // namespace

Alphabet::Alphabet(std::size_t size, std::vector<std::string> labels)
    : size_(size), labels_(std::move(labels)) {
  if (size_ == 0) throw DomainError("alphabet size must be at least 1");
  if (!labels_.empty() && labels_.size() != size_) {
    throw DimensionError("alphabet labels must match alphabet size");
  }
}

Alphabet Alphabet::product(std::size_t n_states, std::size_t n_actions) {
  if (n_states == 0 || n_actions == 0) {
    throw DomainError("product alphabet factors must be at least 1");
  }
  Alphabet a(n_states * n_actions);
  a.n_actions_ = n_actions;
  return a;
}

std::size_t Alphabet::n_states() const {
  if (!is_product()) throw DimensionError("alphabet is not declared as a product");
  return size_ / n_actions_;
}

std::size_t Alphabet::n_actions() const {
  if (!is_product()) throw DimensionError("alphabet is not declared as a product");
  return n_actions_;
}

Histogram::Histogram(Alphabet alphabet, std::vector<std::uint32_t> counts)
    : alphabet_(std::move(alphabet)), counts_(std::move(counts)) {
  if (counts_.size() != alphabet_.size()) {
    throw DimensionError("histogram has " + std::to_string(counts_.size()) +
                         " cells but alphabet has " + std::to_string(alphabet_.size()));
  }
  std::uint64_t total = 0;
  for (auto c : counts_) total += c;
  if (total == 0) throw DomainError("histogram denominator must be at least 1");
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    throw OverflowError("histogram denominator exceeds 32 bits");
  }
  kappa_ = static_cast<std::uint32_t>(total);
}

std::vector<double> Histogram::pmf() const {
  std::vector<double> p(counts_.size());
  for (std::size_t c = 0; c < counts_.size(); ++c) {
    p[c] = static_cast<double>(counts_[c]) / kappa_;
  }
  return p;
}

Histogram marginal(const Histogram& joint, Axis keep) {
  const Alphabet& al = joint.alphabet();
  const std::size_t ns = al.n_states();
  const std::size_t na = al.n_actions();
  auto counts = joint.counts();
  if (keep == Axis::kState) {
    std::vector<std::uint32_t> out(ns, 0);
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t a = 0; a < na; ++a) out[s] += counts[s * na + a];
    return Histogram(Alphabet(ns), std::move(out));
  }
  std::vector<std::uint32_t> out(na, 0);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a) out[a] += counts[s * na + a];
  return Histogram(Alphabet(na), std::move(out));
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("tv_distance: alphabet mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

double tv_distance(const Histogram& p, const Histogram& q) {
  if (!(p.alphabet() == q.alphabet())) throw DimensionError("tv_distance: alphabet mismatch");
  const auto pp = p.pmf();
  const auto qq = q.pmf();
  return tv_distance(pp, qq);
}

double tv_distance(const Histogram& p, std::span<const double> q) {
  const auto pp = p.pmf();
  return tv_distance(pp, q);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i stays integral at every step
    acc = acc * (n - k + i) / i;
    if (acc > kSaturated) {
      throw OverflowError("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                          ") exceeds 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t histogram_count(std::size_t alphabet_size, std::uint32_t kappa) {
  if (alphabet_size == 0) throw DomainError("alphabet size must be at least 1");
  return binomial(static_cast<std::uint64_t>(kappa) + alphabet_size - 1, alphabet_size - 1);
}

bool next_composition(std::span<std::uint32_t> counts) {
  std::size_t i = 0;
  while (i < counts.size() && counts[i] == 0) ++i;
  if (i + 1 >= counts.size()) return false;
  const std::uint32_t v = counts[i] - 1;
  counts[i] = 0;
  counts[i + 1] += 1;
  counts[0] = v;
  return true;
}

HistogramIndex::HistogramIndex(std::size_t alphabet_size, std::uint32_t kappa)
    : alphabet_size_(alphabet_size), kappa_(kappa) {
  if (alphabet_size == 0) throw DomainError("alphabet size must be at least 1");
  if (kappa == 0) throw DomainError("kappa must be at least 1");
  const std::size_t rows = static_cast<std::size_t>(kappa) + alphabet_size;
  pascal_.assign(rows * alphabet_size_, 0);
  for (std::size_t n = 0; n < rows; ++n) {
    pascal_[n * alphabet_size_] = 1;
    for (std::size_t j = 1; j < alphabet_size_ && j <= n; ++j) {
      pascal_[n * alphabet_size_ + j] =
          saturating_add(pascal_[(n - 1) * alphabet_size_ + j - 1],
                         j <= n - 1 ? pascal_[(n - 1) * alphabet_size_ + j] : 0);
    }
  }
  total_ = choose(rows - 1, alphabet_size_ - 1);
  if (total_ == kSaturated) {
    throw OverflowError("histogram count C(" + std::to_string(rows - 1) + ", " +
                        std::to_string(alphabet_size_ - 1) + ") exceeds 64 bits");
  }
}

std::uint64_t HistogramIndex::rank(std::span<const std::uint32_t> counts) const {
  if (counts.size() != alphabet_size_) throw DimensionError("rank: alphabet mismatch");
  std::uint64_t r = 0;
  std::uint64_t prefix = counts[0];
  for (std::size_t j = 1; j < alphabet_size_; ++j) {
    const std::uint64_t before = prefix;
    prefix += counts[j];
    if (prefix > kappa_) break;
    r += choose(prefix + j, j) - choose(before + j, j);
  }
  if (prefix != kappa_) {
    throw DomainError("rank: histogram denominator " + std::to_string(prefix) +
                      " does not match index kappa " + std::to_string(kappa_));
  }
  return r;
}

std::uint64_t HistogramIndex::rank(const Histogram& h) const { return rank(h.counts()); }

void HistogramIndex::unrank(std::uint64_t idx, std::span<std::uint32_t> counts) const {
  if (idx >= total_) {
    throw DomainError("unrank: index " + std::to_string(idx) + " outside [0, " +
                      std::to_string(total_) + ")");
  }
  if (counts.size() != alphabet_size_) throw DimensionError("unrank: alphabet mismatch");
  std::uint64_t r = idx;
  std::uint64_t remaining = kappa_;
  for (std::size_t j = alphabet_size_ - 1; j >= 1; --j) {
    const std::uint64_t top = choose(remaining + j, j);
    std::uint64_t c = 0;
    // largest c with top - C(remaining - c + j, j) <= r
    while (c < remaining && top - choose(remaining - (c + 1) + j, j) <= r) ++c;
    r -= top - choose(remaining - c + j, j);
    counts[j] = static_cast<std::uint32_t>(c);
    remaining -= c;
  }
  counts[0] = static_cast<std::uint32_t>(remaining);
}

std::vector<std::uint32_t> HistogramIndex::unrank(std::uint64_t idx) const {
  std::vector<std::uint32_t> counts(alphabet_size_);
  unrank(idx, counts);
  return counts;
}

std::vector<Histogram> enumerate_histograms(const Alphabet& alphabet, std::uint32_t kappa) {
  if (kappa == 0) throw DomainError("kappa must be at least 1");
  const std::uint64_t total = histogram_count(alphabet.size(), kappa);
  std::vector<Histogram> out;
  out.reserve(total);
  std::vector<std::uint32_t> counts(alphabet.size(), 0);
  counts[0] = kappa;
  do {
    out.emplace_back(alphabet, counts);
  } while (next_composition(counts));
  return out;
}

std::vector<Histogram> enumerate_histograms(std::size_t alphabet_size, std::uint32_t kappa) {
  return enumerate_histograms(Alphabet(alphabet_size), kappa);
}

namespace {

// Calls visit(joint_counts) for every completion of the state counts g.
template <typename Visit>
void for_each_completion(std::span<const std::uint32_t> g, std::size_t n_actions, Visit&& visit) {
  const std::size_t ns = g.size();
  std::vector<std::uint32_t> joint(ns * n_actions, 0);
  for (std::size_t s = 0; s < ns; ++s) joint[s * n_actions] = g[s];
  for (;;) {
    visit(std::span<const std::uint32_t>(joint));
    // odometer: advance the lowest state whose split is not exhausted
    std::size_t s = 0;
    for (; s < ns; ++s) {
      std::span<std::uint32_t> split(joint.data() + s * n_actions, n_actions);
      if (g[s] > 0 && next_composition(split)) break;
      std::fill(split.begin(), split.end(), 0);
      split[0] = g[s];
    }
    if (s == ns) return;
  }
}

}  // namespace

std::vector<Histogram> fiber(const Histogram& g, std::size_t n_actions) {
  if (n_actions == 0) throw DomainError("action alphabet must be non-empty");
  const std::size_t ns = g.alphabet().size();
  const HistogramIndex index(ns * n_actions, g.kappa());
  std::vector<std::pair<std::uint64_t, std::vector<std::uint32_t>>> ranked;
  for_each_completion(g.counts(), n_actions, [&](std::span<const std::uint32_t> joint) {
    ranked.emplace_back(index.rank(joint), std::vector<std::uint32_t>(joint.begin(), joint.end()));
  });
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Histogram> out;
  out.reserve(ranked.size());
  const Alphabet joint_alphabet = Alphabet::product(ns, n_actions);
  for (auto& [r, counts] : ranked) out.emplace_back(joint_alphabet, std::move(counts));
  return out;
}

FiberIndex::FiberIndex(std::size_t n_states, std::size_t n_actions, std::uint32_t kappa)
    : n_states_(n_states),
      n_actions_(n_actions),
      joint_(n_states * n_actions, kappa),
      marginal_(n_states, kappa) {
  marginal_of_.resize(joint_.total());
  std::vector<std::uint64_t> sizes(marginal_.total(), 0);
  std::vector<std::uint32_t> joint_counts(n_states * n_actions);
  std::vector<std::uint32_t> g(n_states);
  for (std::uint64_t z = 0; z < joint_.total(); ++z) {
    joint_.unrank(z, joint_counts);
    std::fill(g.begin(), g.end(), 0);
    for (std::size_t s = 0; s < n_states; ++s)
      for (std::size_t a = 0; a < n_actions; ++a) g[s] += joint_counts[s * n_actions + a];
    marginal_of_[z] = marginal_.rank(g);
    ++sizes[marginal_of_[z]];
  }
  offsets_.assign(marginal_.total() + 1, 0);
  std::partial_sum(sizes.begin(), sizes.end(), offsets_.begin() + 1);
  members_.resize(joint_.total());
  std::vector<std::uint64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // z ascends, so each fiber's member list comes out sorted
  for (std::uint64_t z = 0; z < joint_.total(); ++z) members_[cursor[marginal_of_[z]]++] = z;
}

std::span<const std::uint64_t> FiberIndex::fiber_of(std::uint64_t marginal_rank) const {
  if (marginal_rank >= marginal_.total()) throw DomainError("fiber_of: rank out of range");
  return {members_.data() + offsets_[marginal_rank],
          offsets_[marginal_rank + 1] - offsets_[marginal_rank]};
}

}  // namespace gmfs
