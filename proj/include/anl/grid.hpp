#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

// Periodic scalar fields on [0,2pi)^3 with integer wavenumbers, spectral and
// 4th-order finite-difference derivatives, torus quadrature and
// Fourier-multiplier Sobolev norms. Storage is row major with x^3 fastest,
// matching the snapshot layout.

namespace anl {

enum class DerivMode { Spectral, Fd4 };

struct TorusGrid {
  int n1 = 0, n2 = 0, n3 = 0;
  DerivMode mode = DerivMode::Spectral;
  bool dealias = false;  // 2/3-rule filter applied by derivative ops (spectral only)

  TorusGrid() = default;
  TorusGrid(int n1_, int n2_, int n3_, DerivMode m = DerivMode::Spectral);

  std::int64_t size() const { return std::int64_t(n1) * n2 * n3; }
  double spacing(int axis) const;           // axis in 1..3
  double volume() const;                    // (2pi)^3
  std::int64_t index(int i, int j, int k) const {
    return (std::int64_t(i) * n2 + j) * n3 + k;
  }
  std::array<double, 3> point(int i, int j, int k) const;
  bool operator==(const TorusGrid& o) const {
    return n1 == o.n1 && n2 == o.n2 && n3 == o.n3 && mode == o.mode && dealias == o.dealias;
  }
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const TorusGrid> g, double fill = 0.0)
      : grid_(std::move(g)), v_(grid_->size(), fill) {}

  const TorusGrid& grid() const { return *grid_; }
  std::shared_ptr<const TorusGrid> grid_ptr() const { return grid_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::int64_t size() const { return std::int64_t(v_.size()); }
  double& operator[](std::int64_t i) { return v_[size_t(i)]; }
  double operator[](std::int64_t i) const { return v_[size_t(i)]; }
  bool all_finite() const;

 private:
  std::shared_ptr<const TorusGrid> grid_;
  std::vector<double> v_;
};

// Sample f(x1,x2,x3) on the grid.
template <class F>
ScalarField sample(std::shared_ptr<const TorusGrid> g, F&& f) {
  ScalarField out(g);
  const TorusGrid& gr = *g;
  for (int i = 0; i < gr.n1; ++i)
    for (int j = 0; j < gr.n2; ++j)
      for (int k = 0; k < gr.n3; ++k) {
        auto x = gr.point(i, j, k);
        out[gr.index(i, j, k)] = f(x[0], x[1], x[2]);
      }
  return out;
}

// d f / d x^axis, axis in 1..3; spectral (exact for band-limited fields) or
// 4th-order centered differences per the grid's mode.
ScalarField partial_derivative(const ScalarField& f, int axis);

// Trapezoid-on-torus quadrature (= exact spectral mean times volume).
double integrate(const ScalarField& f);

double linf_norm(const ScalarField& f);
double l2_norm(const ScalarField& f);  // sqrt(integrate(f^2))

// ( sum_k (1+|k|^2)^r |f_k|^2 )^{1/2}, Parseval-normalized so r=0 gives the
// L^2 norm. Requires a spectral-mode grid.
double sobolev_norm(const ScalarField& f, double r);

// Zero all modes with |k_i| > n_i/3 on any axis.
ScalarField filter_two_thirds(const ScalarField& f);

// Restrict a field to a coarser grid (both spectral, sizes divide evenly);
// used by convergence studies for comparing fields across resolutions.
ScalarField restrict_to(const ScalarField& f, std::shared_ptr<const TorusGrid> coarse);

// Flat binary snapshot (row-major x^3 fastest, float64 little-endian) with a
// JSON sidecar <path>.json carrying grid dims and field names.
void save_fields(const std::string& path, const TorusGrid& grid,
                 const std::vector<std::pair<std::string, const ScalarField*>>& fields,
                 double time_stamp);
struct LoadedFields {
  std::shared_ptr<const TorusGrid> grid;
  std::vector<std::pair<std::string, ScalarField>> fields;
  double time_stamp = 0.0;
};
LoadedFields load_fields(const std::string& path);

}  // namespace anl
