#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "perseus/core.hpp"

namespace perseus {

// Compact convex feasible set with the three oracles the solver needs:
// Euclidean projection, linear maximization (LMO) and a diameter bound.
class FeasibleSet {
 public:
  virtual ~FeasibleSet() = default;
  virtual int dim() const = 0;
  virtual Vec project(const Vec& y) const = 0;
  virtual Vec lmo(const Vec& c) const = 0;  // argmax_{x in X} <c, x>
  virtual double diameter() const = 0;
  virtual bool contains(const Vec& x, double tol) const = 0;
};

using SetPtr = std::shared_ptr<const FeasibleSet>;

// ---------------------------------------------------------------------------

class Box final : public FeasibleSet {
 public:
  Box(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw DimensionMismatch("box bounds");
    for (Eigen::Index i = 0; i < lo_.size(); ++i) {
      if (lo_[i] > hi_[i]) throw InvalidSpec("box with lo > hi");
    }
  }
  Box(int dim, double lo, double hi)
      : Box(Vec::Constant(dim, lo), Vec::Constant(dim, hi)) {}

  int dim() const override { return static_cast<int>(lo_.size()); }

  Vec project(const Vec& y) const override {
    return y.cwiseMax(lo_).cwiseMin(hi_);
  }

  Vec lmo(const Vec& c) const override {
    Vec x(lo_.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) x[i] = c[i] >= 0.0 ? hi_[i] : lo_[i];
    return x;
  }

  double diameter() const override { return (hi_ - lo_).norm(); }

  bool contains(const Vec& x, double tol) const override {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
    }
    return true;
  }

  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }

 private:
  Vec lo_, hi_;
};

// ---------------------------------------------------------------------------

class Ball final : public FeasibleSet {
 public:
  Ball(Vec center, double radius) : center_(std::move(center)), radius_(radius) {
    if (radius_ < 0) throw InvalidSpec("negative ball radius");
  }

  int dim() const override { return static_cast<int>(center_.size()); }

  Vec project(const Vec& y) const override {
    const Vec d = y - center_;
    const double n = d.norm();
    if (n <= radius_) return y;
    return center_ + d * (radius_ / n);
  }

  Vec lmo(const Vec& c) const override {
    const double n = c.norm();
    if (n == 0.0) return center_;
    return center_ + c * (radius_ / n);
  }

  double diameter() const override { return 2.0 * radius_; }

  bool contains(const Vec& x, double tol) const override {
    return (x - center_).norm() <= radius_ + tol;
  }

 private:
  Vec center_;
  double radius_;
};

// ---------------------------------------------------------------------------
// Probability simplex scaled to total mass s: {x >= 0, sum x = s}.
// Projection by the sort-and-threshold rule (Held et al.), O(d log d).

class Simplex final : public FeasibleSet {
 public:
  explicit Simplex(int dim, double total = 1.0) : dim_(dim), total_(total) {
    if (dim < 1 || total <= 0) throw InvalidSpec("simplex needs dim >= 1, total > 0");
  }

  int dim() const override { return dim_; }

  Vec project(const Vec& y) const override {
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0;
    double tau = 0.0;
    int k = 0;
    for (int i = 0; i < dim_; ++i) {
      cum += u[i];
      const double t = (cum - total_) / (i + 1);
      if (t < u[i]) {
        tau = t;
        k = i + 1;
      }
    }
    (void)k;
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = std::max(y[i] - tau, 0.0);
    return x;
  }

  Vec lmo(const Vec& c) const override {
    Eigen::Index best = 0;
    c.maxCoeff(&best);
    Vec x = Vec::Zero(dim_);
    x[best] = total_;
    return x;
  }

  double diameter() const override {
    return dim_ > 1 ? total_ * std::sqrt(2.0) : 0.0;
  }

  bool contains(const Vec& x, double tol) const override {
    if (std::abs(x.sum() - total_) > tol * dim_) return false;
    return (x.array() >= -tol).all();
  }

 private:
  int dim_;
  double total_;
};

// ---------------------------------------------------------------------------

class ProductSet final : public FeasibleSet {
 public:
  explicit ProductSet(std::vector<SetPtr> parts) : parts_(std::move(parts)) {
    for (const auto& p : parts_) dim_ += p->dim();
  }

  int dim() const override { return dim_; }

  Vec project(const Vec& y) const override {
    return apply_blockwise(y, [](const FeasibleSet& s, const Vec& b) { return s.project(b); });
  }

  Vec lmo(const Vec& c) const override {
    return apply_blockwise(c, [](const FeasibleSet& s, const Vec& b) { return s.lmo(b); });
  }

  double diameter() const override {
    double sq = 0.0;
    for (const auto& p : parts_) sq += p->diameter() * p->diameter();
    return std::sqrt(sq);
  }

  bool contains(const Vec& x, double tol) const override {
    int off = 0;
    for (const auto& p : parts_) {
      if (!p->contains(x.segment(off, p->dim()), tol)) return false;
      off += p->dim();
    }
    return true;
  }

 private:
  template <typename F>
  Vec apply_blockwise(const Vec& v, F&& f) const {
    if (static_cast<int>(v.size()) != dim_) throw DimensionMismatch("product set input");
    Vec out(dim_);
    int off = 0;
    for (const auto& p : parts_) {
      out.segment(off, p->dim()) = f(*p, v.segment(off, p->dim()));
      off += p->dim();
    }
    return out;
  }

  std::vector<SetPtr> parts_;
  int dim_ = 0;
};

// ---------------------------------------------------------------------------
// Intersection of slabs lo_j <= <a_j, x> <= hi_j, projected by Dykstra's
// alternating scheme. Used for coupled polyhedra (the chain-constrained Z of
// the lower-bound instance); LMO and diameter are not derivable from slabs
// alone, so the constructor takes them explicitly.

struct Slab {
  Vec a;
  double lo;
  double hi;
};

class SlabIntersection final : public FeasibleSet {
 public:
  SlabIntersection(int dim, std::vector<Slab> slabs, std::function<Vec(const Vec&)> lmo_fn,
                   double diameter, double tol = 1e-10, int max_cycles = 10000)
      : dim_(dim), slabs_(std::move(slabs)), lmo_(std::move(lmo_fn)),
        diameter_(diameter), tol_(tol), max_cycles_(max_cycles) {
    for (auto& s : slabs_) {
      if (static_cast<int>(s.a.size()) != dim_) throw DimensionMismatch("slab normal");
      if (s.lo > s.hi) throw InvalidSpec("slab with lo > hi");
      norm2_.push_back(s.a.squaredNorm());
    }
  }

  int dim() const override { return dim_; }

  Vec project(const Vec& y) const override {
    Vec x = y;
    std::vector<Vec> corr(slabs_.size(), Vec::Zero(dim_));
    for (int cycle = 0; cycle < max_cycles_; ++cycle) {
      double moved = 0.0;
      for (std::size_t j = 0; j < slabs_.size(); ++j) {
        const Vec z = x + corr[j];
        const Vec px = project_slab(j, z);
        corr[j] = z - px;
        moved = std::max(moved, (px - x).lpNorm<Eigen::Infinity>());
        x = px;
      }
      if (moved <= tol_) break;
    }
    return x;
  }

  Vec lmo(const Vec& c) const override { return lmo_(c); }

  double diameter() const override { return diameter_; }

  bool contains(const Vec& x, double tol) const override {
    for (std::size_t j = 0; j < slabs_.size(); ++j) {
      const double scale = std::sqrt(norm2_[j]);
      const double t = slabs_[j].a.dot(x);
      if (t < slabs_[j].lo - tol * (1.0 + scale) || t > slabs_[j].hi + tol * (1.0 + scale)) {
        return false;
      }
    }
    return true;
  }

 private:
  Vec project_slab(std::size_t j, const Vec& z) const {
    const auto& s = slabs_[j];
    const double t = s.a.dot(z);
    if (t > s.hi) return z - s.a * ((t - s.hi) / norm2_[j]);
    if (t < s.lo) return z - s.a * ((t - s.lo) / norm2_[j]);
    return z;
  }

  int dim_;
  std::vector<Slab> slabs_;
  std::function<Vec(const Vec&)> lmo_;
  double diameter_;
  double tol_;
  int max_cycles_;
  std::vector<double> norm2_;
};

}  // namespace perseus
