#include "gmfs/graphon.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <utility>

#include "gmfs/errors.hpp"

namespace gmfs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t block_of(const std::vector<double>& boundaries, double a) {
  // half-open [b_k, b_{k+1}); the last block also takes a == 1
  return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), a) -
                                  boundaries.begin());
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

Graphon::Graphon(GraphonKind kind, int latent_dim) : kind_(std::move(kind)) {
  const bool radial = std::holds_alternative<RadialGraphon>(kind_);
  const bool uniform = std::holds_alternative<UniformGraphon>(kind_) ||
                       std::holds_alternative<ZeroGraphon>(kind_);
  latent_dim_ = latent_dim == 0 ? (radial ? 2 : 1) : latent_dim;
  if (latent_dim_ != 1 && latent_dim_ != 2) throw DomainError("latent_dim must be 1 or 2");
  if (latent_dim_ == 2 && !radial && !uniform) {
    throw DomainError("only radial and uniform graphons support 2-D latent points");
  }
  std::visit(overloaded{
                 [](const RadialGraphon& g) {
                   if (!(g.radius > 0.0 && g.radius <= 1.0))
                     throw DomainError("radial graphon radius must lie in (0, 1]");
                 },
                 [](const ExpDecayGraphon& g) {
                   if (!(g.beta > 0.0)) throw DomainError("exp-decay beta must be positive");
                 },
                 [](const BlockGraphon& g) {
                   if (!std::is_sorted(g.boundaries.begin(), g.boundaries.end()))
                     throw DomainError("block boundaries must be sorted");
                   for (double b : g.boundaries)
                     if (!(b > 0.0 && b < 1.0))
                       throw DomainError("block boundaries must lie in (0, 1)");
                   const std::size_t k = g.boundaries.size() + 1;
                   if (g.block_values.size() != k)
                     throw DimensionError("block_values must be (boundaries + 1) square");
                   for (std::size_t i = 0; i < k; ++i) {
                     if (g.block_values[i].size() != k)
                       throw DimensionError("block_values must be (boundaries + 1) square");
                     for (std::size_t j = 0; j < k; ++j) {
                       check_unit(g.block_values[i][j], "block value");
                       if (g.block_values[i][j] != g.block_values[j][i])
                         throw DomainError("block_values must be symmetric");
                     }
                   }
                 },
                 [](const UniformGraphon&) {},
                 [](const ZeroGraphon&) {},
             },
             kind_);
}

std::string Graphon::name() const {
  return std::visit(overloaded{
                        [](const RadialGraphon&) { return std::string("radial"); },
                        [](const ExpDecayGraphon&) { return std::string("exp_decay"); },
                        [](const BlockGraphon&) { return std::string("block"); },
                        [](const UniformGraphon&) { return std::string("uniform"); },
                        [](const ZeroGraphon&) { return std::string("zero"); },
                    },
                    kind_);
}

double Graphon::evaluate(const LatentPoint& x, const LatentPoint& y) const {
  if (x.dim != latent_dim_ || y.dim != latent_dim_) {
    throw DimensionError("latent point dimension does not match graphon (" +
                         std::to_string(latent_dim_) + "-D)");
  }
  return std::visit(
      overloaded{
          [&](const RadialGraphon& g) {
            const double dx = x.x[0] - y.x[0];
            const double dy = x.x[1] - y.x[1];
            return std::hypot(dx, dy) <= g.radius ? 1.0 : 0.0;
          },
          [&](const ExpDecayGraphon& g) { return std::exp(-g.beta * std::abs(x.x[0] - y.x[0])); },
          [&](const BlockGraphon& g) {
            return g.block_values[block_of(g.boundaries, x.x[0])][block_of(g.boundaries, y.x[0])];
          },
          [](const UniformGraphon&) { return 1.0; },
          [](const ZeroGraphon&) { return 0.0; },
      },
      kind_);
}

LatentAssignment::LatentAssignment(std::vector<LatentPoint> coords, LatentScheme scheme)
    : coords_(std::move(coords)), scheme_(scheme) {
  for (const auto& p : coords_) {
    if (p.dim != coords_.front().dim) throw DimensionError("mixed latent dimensions");
    for (int d = 0; d < p.dim; ++d) check_unit(p.x[d], "latent coordinate");
  }
}

LatentAssignment LatentAssignment::sequential(std::size_t n) {
  std::vector<LatentPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    pts.push_back(LatentPoint::line(static_cast<double>(i) / static_cast<double>(n)));
  }
  return LatentAssignment(std::move(pts), LatentScheme::kSequential);
}

LatentAssignment LatentAssignment::grid(std::size_t n) {
  std::size_t side = 1;
  while (side * side < n) ++side;
  const double step = side > 1 ? 1.0 / static_cast<double>(side - 1) : 0.0;
  std::vector<LatentPoint> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t row = k / side;
    const std::size_t col = k % side;
    pts.push_back(LatentPoint::plane(static_cast<double>(col) * step,
                                     static_cast<double>(row) * step));
  }
  return LatentAssignment(std::move(pts), LatentScheme::kGrid);
}

LatentAssignment LatentAssignment::explicit_points(std::vector<LatentPoint> coords) {
  return LatentAssignment(std::move(coords), LatentScheme::kExplicit);
}

WeightMatrix WeightMatrix::from_raw(std::size_t n, std::vector<double> raw) {
  if (n < 2) throw DomainError("weight matrix needs at least 2 agents");
  if (raw.size() != n * n) throw DimensionError("raw weight matrix must be n x n");
  WeightMatrix w;
  w.n_ = n;
  w.raw_ = std::move(raw);
  for (std::size_t i = 0; i < n; ++i) {
    w.raw_[i * n + i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(w.raw_[i * n + j] >= 0.0)) throw DomainError("raw weights must be non-negative");
    }
  }
  w.normalize();
  return w;
}

void WeightMatrix::normalize() {
  normalized_.assign(n_ * n_, 0.0);
  isolated_.clear();
  for (std::size_t i = 0; i < n_; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n_; ++j) total += raw_[i * n_ + j];
    if (total > 0.0) {
      for (std::size_t j = 0; j < n_; ++j) normalized_[i * n_ + j] = raw_[i * n_ + j] / total;
    } else {
      isolated_.push_back(i);
      const double u = 1.0 / static_cast<double>(n_ - 1);
      for (std::size_t j = 0; j < n_; ++j) normalized_[i * n_ + j] = (i == j) ? 0.0 : u;
    }
  }
  if (!isolated_.empty()) {
    spdlog::warn("{} agent(s) have zero graphon weight to all others; using uniform rows",
                 isolated_.size());
  }
}

WeightMatrix build_weights(const Graphon& graphon, const LatentAssignment& assignment) {
  const std::size_t n = assignment.n();
  if (n < 2) throw DomainError("build_weights needs at least 2 agents");
  if (assignment.dim() != graphon.latent_dim()) {
    throw DimensionError("latent assignment is " + std::to_string(assignment.dim()) +
                         "-D but graphon expects " + std::to_string(graphon.latent_dim()) + "-D");
  }
  WeightMatrix w;
  w.n_ = n;
  w.raw_.assign(n * n, 0.0);
  const auto& pts = assignment.coords();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = graphon.evaluate(pts[i], pts[j]);
      w.raw_[i * n + j] = v;
      w.raw_[j * n + i] = v;
    }
  }
  w.normalize();
  return w;
}

}  // namespace gmfs
