#include "anl/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include "json.hpp"

namespace anl {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// FFTW plans are cached per grid shape; plan creation is serialized.
struct FftPlan {
  int n1, n2, n3;
  std::int64_t nreal, ncplx;
  fftw_plan fwd = nullptr, bwd = nullptr;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;

  FftPlan(int a, int b, int c) : n1(a), n2(b), n3(c) {
    nreal = std::int64_t(n1) * n2 * n3;
    ncplx = std::int64_t(n1) * n2 * (n3 / 2 + 1);
    real = fftw_alloc_real(size_t(nreal));
    cplx = fftw_alloc_complex(size_t(ncplx));
    fwd = fftw_plan_dft_r2c_3d(n1, n2, n3, real, cplx, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_3d(n1, n2, n3, cplx, real, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(cplx);
  }
};

std::mutex g_fft_mutex;
FftPlan& plan_for(const TorusGrid& g) {
  static std::map<std::array<int, 3>, std::unique_ptr<FftPlan>> cache;
  std::array<int, 3> key{g.n1, g.n2, g.n3};
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<FftPlan>(g.n1, g.n2, g.n3)).first;
  return *it->second;
}

int wavenumber(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

ScalarField fd4_derivative(const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid();
  ScalarField out(f.grid_ptr());
  const int n[3] = {g.n1, g.n2, g.n3};
  const int na = n[axis - 1];
  const double idx12 = 1.0 / (12.0 * g.spacing(axis));
  const std::int64_t stride = axis == 1 ? std::int64_t(g.n2) * g.n3
                              : axis == 2 ? std::int64_t(g.n3)
                                          : 1;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      for (int k = 0; k < g.n3; ++k) {
        const int c = axis == 1 ? i : axis == 2 ? j : k;
        const std::int64_t base = g.index(i, j, k) - std::int64_t(c) * stride;
        auto at = [&](int m) {
          int mm = m % na;
          if (mm < 0) mm += na;
          return f[base + std::int64_t(mm) * stride];
        };
        out[g.index(i, j, k)] =
            (-at(c + 2) + 8.0 * at(c + 1) - 8.0 * at(c - 1) + at(c - 2)) * idx12;
      }
  return out;
}
}  // namespace

TorusGrid::TorusGrid(int n1_, int n2_, int n3_, DerivMode m)
    : n1(n1_), n2(n2_), n3(n3_), mode(m) {
  if (n1 < 8 || n2 < 8 || n3 < 8 || n1 % 2 || n2 % 2 || n3 % 2)
    throw std::invalid_argument("TorusGrid: points per axis must be even and >= 8");
}

double TorusGrid::spacing(int axis) const {
  const int n = axis == 1 ? n1 : axis == 2 ? n2 : n3;
  return kTwoPi / n;
}

double TorusGrid::volume() const { return kTwoPi * kTwoPi * kTwoPi; }

std::array<double, 3> TorusGrid::point(int i, int j, int k) const {
  return {kTwoPi * i / n1, kTwoPi * j / n2, kTwoPi * k / n3};
}

bool ScalarField::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

ScalarField partial_derivative(const ScalarField& f, int axis) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("partial_derivative: axis must be 1..3");
  const TorusGrid& g = f.grid();
  if (g.mode == DerivMode::Fd4) return fd4_derivative(f, axis);

  std::lock_guard<std::mutex> lock(g_fft_mutex);
  FftPlan& p = plan_for(g);
  std::memcpy(p.real, f.data(), sizeof(double) * size_t(p.nreal));
  fftw_execute(p.fwd);

  const double scale = 1.0 / double(p.nreal);
  const int n3h = g.n3 / 2 + 1;
  const bool filt = g.dealias;
  std::int64_t idx = 0;
  for (int i = 0; i < g.n1; ++i) {
    const int k1 = wavenumber(i, g.n1);
    for (int j = 0; j < g.n2; ++j) {
      const int k2 = wavenumber(j, g.n2);
      for (int k = 0; k < n3h; ++k, ++idx) {
        const int k3 = k;
        int ka = axis == 1 ? k1 : axis == 2 ? k2 : k3;
        // Nyquist mode derivative set to zero.
        if ((axis == 1 && 2 * std::abs(k1) == g.n1) ||
            (axis == 2 && 2 * std::abs(k2) == g.n2) ||
            (axis == 3 && 2 * k3 == g.n3))
          ka = 0;
        double re = p.cplx[idx][0], im = p.cplx[idx][1];
        double w = double(ka) * scale;
        if (filt && (3 * std::abs(k1) > g.n1 || 3 * std::abs(k2) > g.n2 || 3 * k3 > g.n3))
          w = 0.0;
        p.cplx[idx][0] = -w * im;
        p.cplx[idx][1] = w * re;
      }
    }
  }
  fftw_execute(p.bwd);
  ScalarField out(f.grid_ptr());
  std::memcpy(out.data(), p.real, sizeof(double) * size_t(p.nreal));
  return out;
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  const std::int64_t n = f.size();
  for (std::int64_t i = 0; i < n; ++i) s += f[i];
  return s * (f.grid().volume() / double(n));
}

double linf_norm(const ScalarField& f) {
  double m = 0.0;
  const std::int64_t n = f.size();
  for (std::int64_t i = 0; i < n; ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  const std::int64_t n = f.size();
  for (std::int64_t i = 0; i < n; ++i) s += f[i] * f[i];
  return std::sqrt(s * (f.grid().volume() / double(n)));
}

double sobolev_norm(const ScalarField& f, double r) {
  const TorusGrid& g = f.grid();
  if (g.mode != DerivMode::Spectral)
    throw std::runtime_error("sobolev_norm: requires a spectral-mode grid");
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  FftPlan& p = plan_for(g);
  std::memcpy(p.real, f.data(), sizeof(double) * size_t(p.nreal));
  fftw_execute(p.fwd);

  const double scale = 1.0 / double(p.nreal);
  const int n3h = g.n3 / 2 + 1;
  double acc = 0.0;
  std::int64_t idx = 0;
  for (int i = 0; i < g.n1; ++i) {
    const int k1 = wavenumber(i, g.n1);
    for (int j = 0; j < g.n2; ++j) {
      const int k2 = wavenumber(j, g.n2);
      for (int k = 0; k < n3h; ++k, ++idx) {
        const double re = p.cplx[idx][0] * scale, im = p.cplx[idx][1] * scale;
        // r2c stores k3 >= 0 only; double-count the interior to account for
        // the conjugate modes.
        const double mult = (k == 0 || 2 * k == g.n3) ? 1.0 : 2.0;
        const double k2sum = double(k1) * k1 + double(k2) * k2 + double(k) * k;
        acc += mult * std::pow(1.0 + k2sum, r) * (re * re + im * im);
      }
    }
  }
  return std::sqrt(acc * f.grid().volume());
}

ScalarField filter_two_thirds(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  if (g.mode != DerivMode::Spectral)
    throw std::runtime_error("filter_two_thirds: requires a spectral-mode grid");
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  FftPlan& p = plan_for(g);
  std::memcpy(p.real, f.data(), sizeof(double) * size_t(p.nreal));
  fftw_execute(p.fwd);
  const double scale = 1.0 / double(p.nreal);
  const int n3h = g.n3 / 2 + 1;
  std::int64_t idx = 0;
  for (int i = 0; i < g.n1; ++i) {
    const int k1 = wavenumber(i, g.n1);
    for (int j = 0; j < g.n2; ++j) {
      const int k2 = wavenumber(j, g.n2);
      for (int k = 0; k < n3h; ++k, ++idx) {
        const bool kill = 3 * std::abs(k1) > g.n1 || 3 * std::abs(k2) > g.n2 || 3 * k > g.n3;
        const double w = kill ? 0.0 : scale;
        p.cplx[idx][0] *= w;
        p.cplx[idx][1] *= w;
      }
    }
  }
  fftw_execute(p.bwd);
  ScalarField out(f.grid_ptr());
  std::memcpy(out.data(), p.real, sizeof(double) * size_t(p.nreal));
  return out;
}

ScalarField restrict_to(const ScalarField& f, std::shared_ptr<const TorusGrid> coarse) {
  const TorusGrid& gf = f.grid();
  const TorusGrid& gc = *coarse;
  if (gf.n1 % gc.n1 || gf.n2 % gc.n2 || gf.n3 % gc.n3)
    throw std::invalid_argument("restrict_to: coarse grid must divide the fine grid");
  const int r1 = gf.n1 / gc.n1, r2 = gf.n2 / gc.n2, r3 = gf.n3 / gc.n3;
  ScalarField out(coarse);
  for (int i = 0; i < gc.n1; ++i)
    for (int j = 0; j < gc.n2; ++j)
      for (int k = 0; k < gc.n3; ++k)
        out[gc.index(i, j, k)] = f[gf.index(i * r1, j * r2, k * r3)];
  return out;
}

void save_fields(const std::string& path, const TorusGrid& grid,
                 const std::vector<std::pair<std::string, const ScalarField*>>& fields,
                 double time_stamp) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("save_fields: cannot open " + path);
  nlohmann::json meta;
  meta["n1"] = grid.n1;
  meta["n2"] = grid.n2;
  meta["n3"] = grid.n3;
  meta["mode"] = grid.mode == DerivMode::Spectral ? "spectral" : "fd4";
  meta["layout"] = "row-major x3 fastest, float64 little-endian";
  meta["time"] = time_stamp;
  meta["fields"] = nlohmann::json::array();
  for (auto& [name, fld] : fields) {
    if (!(fld->grid() == grid)) throw std::invalid_argument("save_fields: grid mismatch");
    meta["fields"].push_back(name);
    bin.write(reinterpret_cast<const char*>(fld->data()),
              std::streamsize(sizeof(double) * size_t(fld->size())));
  }
  std::ofstream side(path + ".json");
  side << meta.dump(2) << "\n";
}

LoadedFields load_fields(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw std::runtime_error("load_fields: missing sidecar " + path + ".json");
  nlohmann::json meta = nlohmann::json::parse(side);
  auto grid = std::make_shared<TorusGrid>(
      meta.at("n1").get<int>(), meta.at("n2").get<int>(), meta.at("n3").get<int>(),
      meta.at("mode").get<std::string>() == "fd4" ? DerivMode::Fd4 : DerivMode::Spectral);
  LoadedFields out;
  out.grid = grid;
  out.time_stamp = meta.value("time", 0.0);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("load_fields: cannot open " + path);
  for (auto& name : meta.at("fields")) {
    ScalarField f(grid);
    bin.read(reinterpret_cast<char*>(f.data()),
             std::streamsize(sizeof(double) * size_t(f.size())));
    if (!bin) throw std::runtime_error("load_fields: truncated binary " + path);
    out.fields.emplace_back(name.get<std::string>(), std::move(f));
  }
  return out;
}

}  // namespace anl
