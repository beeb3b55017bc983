#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gmfs {

/// A latent coordinate in [0,1] (dim 1) or [0,1]^2 (dim 2).
struct LatentPoint {
  std::array<double, 2> x{0.0, 0.0};
  int dim = 1;

  static LatentPoint line(double a) { return {{a, 0.0}, 1}; }
  static LatentPoint plane(double a, double b) { return {{a, b}, 2}; }
};

struct RadialGraphon {
  double radius = 0.3;
};
struct ExpDecayGraphon {
  double beta = 1.0;
};
/// Piecewise-constant graphon. Block k covers [b_k, b_{k+1}) with the last
/// block closed at 1.
struct BlockGraphon {
  std::vector<double> boundaries;                 // interior cut points, sorted
  std::vector<std::vector<double>> block_values;  // symmetric, (K+1) x (K+1)
};
struct UniformGraphon {};
/// W identically zero. Only useful to exercise the isolated-agent fallback.
struct ZeroGraphon {};

using GraphonKind =
    std::variant<RadialGraphon, ExpDecayGraphon, BlockGraphon, UniformGraphon, ZeroGraphon>;

class Graphon {
 public:
  /// Radial graphons default to 2-D latent space; every other kind is 1-D.
  explicit Graphon(GraphonKind kind, int latent_dim = 0);

  static Graphon radial(double radius, int latent_dim = 2) {
    return Graphon(RadialGraphon{radius}, latent_dim);
  }
  static Graphon exp_decay(double beta) { return Graphon(ExpDecayGraphon{beta}); }
  static Graphon block(std::vector<double> boundaries, std::vector<std::vector<double>> values) {
    return Graphon(BlockGraphon{std::move(boundaries), std::move(values)});
  }
  static Graphon uniform(int latent_dim = 1) { return Graphon(UniformGraphon{}, latent_dim); }

  const GraphonKind& kind() const { return kind_; }
  int latent_dim() const { return latent_dim_; }
  std::string name() const;

  /// W(x, y) in [0, 1]; exactly symmetric.
  double evaluate(const LatentPoint& x, const LatentPoint& y) const;

 private:
  GraphonKind kind_;
  int latent_dim_;
};

enum class LatentScheme { kSequential, kGrid, kExplicit };

class LatentAssignment {
 public:
  /// alpha_i = i / n for i = 1..n (1-D).
  static LatentAssignment sequential(std::size_t n);
  /// Row-major lattice of side ceil(sqrt(n)) in the unit square, points at
  /// k / (side - 1). n = 25 gives the 5 x 5 grid with spacing 0.25.
  static LatentAssignment grid(std::size_t n);
  static LatentAssignment explicit_points(std::vector<LatentPoint> coords);

  std::size_t n() const { return coords_.size(); }
  const std::vector<LatentPoint>& coords() const { return coords_; }
  LatentScheme scheme() const { return scheme_; }
  int dim() const { return coords_.empty() ? 1 : coords_.front().dim; }

 private:
  LatentAssignment(std::vector<LatentPoint> coords, LatentScheme scheme);

  std::vector<LatentPoint> coords_;
  LatentScheme scheme_;
};

/// Dense n x n graphon weights. Both matrices have a zero diagonal; each row
/// of `normalized` is a probability distribution over the other agents.
class WeightMatrix {
 public:
  std::size_t n() const { return n_; }
  double raw(std::size_t i, std::size_t j) const { return raw_[i * n_ + j]; }
  double normalized(std::size_t i, std::size_t j) const { return normalized_[i * n_ + j]; }
  std::span<const double> normalized_row(std::size_t i) const {
    return {normalized_.data() + i * n_, n_};
  }
  /// Rows whose raw weights summed to zero and fell back to uniform.
  const std::vector<std::size_t>& isolated() const { return isolated_; }

  /// Builds from an explicit raw matrix; validates symmetry-free shape only.
  static WeightMatrix from_raw(std::size_t n, std::vector<double> raw);

 private:
  friend WeightMatrix build_weights(const Graphon&, const LatentAssignment&);
  void normalize();

  std::size_t n_ = 0;
  std::vector<double> raw_;
  std::vector<double> normalized_;
  std::vector<std::size_t> isolated_;
};

WeightMatrix build_weights(const Graphon& graphon, const LatentAssignment& assignment);

}  // namespace gmfs
