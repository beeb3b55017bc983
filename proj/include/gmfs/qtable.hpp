#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmfs/histogram.hpp"

namespace gmfs {

/// Joint mode indexes Q by joint S x A histograms z; Marginal mode by state
/// marginals g (valid only when the environment is marginal-sufficient).
enum class Mode : std::uint8_t { kJoint = 0, kMarginal = 1 };

const char* to_string(Mode mode);

struct QTableMeta {
  double gamma = 0.95;
  std::string env_name;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  double residual = 0.0;
};

/// Dense Q(s, a, h) with h the rank of a histogram of denominator kappa.
/// Storage order: ((s * |A|) + a) * |H| + rank(h).
class QTable {
 public:
  QTable(Mode mode, std::size_t n_states, std::size_t n_actions, std::uint32_t kappa,
         QTableMeta meta = {});

  Mode mode() const { return mode_; }
  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::uint32_t kappa() const { return kappa_; }
  /// |Z_kappa| in Joint mode, |G_kappa| in Marginal mode.
  std::size_t n_histograms() const { return n_hist_; }
  std::size_t size() const { return values_.size(); }
  /// Histogram alphabet: |S| * |A| (Joint) or |S| (Marginal).
  std::size_t hist_alphabet() const { return index_.alphabet_size(); }
  const HistogramIndex& index() const { return index_; }

  std::size_t offset(std::size_t s, std::size_t a, std::uint64_t h) const {
    return (s * n_actions_ + a) * n_hist_ + h;
  }
  double operator()(std::size_t s, std::size_t a, std::uint64_t h) const {
    return values_[offset(s, a, h)];
  }
  double& operator()(std::size_t s, std::size_t a, std::uint64_t h) {
    return values_[offset(s, a, h)];
  }
  double at(std::size_t s, std::size_t a, const Histogram& h) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double sup_norm() const;

  QTableMeta& meta() { return meta_; }
  const QTableMeta& meta() const { return meta_; }

 private:
  Mode mode_;
  std::size_t n_states_;
  std::size_t n_actions_;
  std::uint32_t kappa_;
  HistogramIndex index_;
  std::size_t n_hist_;
  std::vector<double> values_;
  QTableMeta meta_;
};

/// Sup-norm distance between two tables of identical shape.
double sup_distance(const QTable& a, const QTable& b);

/// Binary Q-table file: little-endian, magic "GMFSQT01" (the trailing digits
/// version the colex enumeration order), then
///   mode u8 | |S| u32 | |A| u32 | kappa u32 | gamma f64 | residual f64 |
///   seed u64 | env-name (u32 length + UTF-8 bytes) |
///   f64 payload in storage order | CRC32 of everything before it (u32).
void save_qtable(const QTable& q, const std::string& path);

struct QTableShape {
  Mode mode;
  std::size_t n_states;
  std::size_t n_actions;
  std::uint32_t kappa;
};

/// Throws FormatError on a bad magic, truncation or checksum mismatch, and
/// DimensionError when `expected` is given and the header disagrees with it.
QTable load_qtable(const std::string& path, std::optional<QTableShape> expected = std::nullopt);

}  // namespace gmfs
