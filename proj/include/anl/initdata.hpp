#pragma once

#include <cstdint>
#include <vector>

#include "anl/fluid.hpp"

// Fourier-mode initial-data recipes. A recipe is resolution-independent: the
// same mode list evaluates on any grid, which is what convergence studies
// need. Randomness is derived from splitmix64 so a fixed seed is reproducible
// across platforms.

namespace anl {

struct ModeSpec {
  int target;      // 0=h, 1=s, 2..4 = u^1..u^3
  int k[3];        // integer wavevector, not all zero
  double amplitude;
  double phase;
};

struct InitialDataRecipe {
  double h0 = 0.0, s0 = 0.0;
  std::vector<ModeSpec> modes;

  // |k| <= kmax (Euclidean), a fixed number of modes per field, total
  // per-field amplitude <= amp_*.
  static InitialDataRecipe random(std::uint64_t seed, int kmax, double amp_h, double amp_s,
                                  double amp_u, int modes_per_field = 6);
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
inline double uniform01(std::uint64_t& state) {
  return double(splitmix64(state) >> 11) * 0x1.0p-53;
}
}  // namespace detail

inline InitialDataRecipe InitialDataRecipe::random(std::uint64_t seed, int kmax, double amp_h,
                                                   double amp_s, double amp_u,
                                                   int modes_per_field) {
  InitialDataRecipe r;
  std::uint64_t st = seed ^ 0xa5a5a5a5deadbeefull;
  const double amps[5] = {amp_h, amp_s, amp_u, amp_u, amp_u};
  for (int f = 0; f < 5; ++f) {
    if (amps[f] == 0.0) continue;
    for (int m = 0; m < modes_per_field; ++m) {
      ModeSpec ms;
      ms.target = f;
      do {
        for (int d = 0; d < 3; ++d)
          ms.k[d] = int(detail::splitmix64(st) % (2 * std::uint64_t(kmax) + 1)) - kmax;
      } while ((ms.k[0] == 0 && ms.k[1] == 0 && ms.k[2] == 0) ||
               ms.k[0] * ms.k[0] + ms.k[1] * ms.k[1] + ms.k[2] * ms.k[2] > kmax * kmax);
      ms.amplitude = amps[f] * (0.5 + 0.5 * detail::uniform01(st)) / modes_per_field;
      ms.phase = 6.283185307179586 * detail::uniform01(st);
      r.modes.push_back(ms);
    }
  }
  return r;
}

inline FluidState realize(const InitialDataRecipe& recipe,
                          std::shared_ptr<const TorusGrid> grid, const EosParams& eos,
                          const HyperbolicityRegion& region) {
  FluidState st = FluidState::constant(grid, eos, recipe.h0, recipe.s0);
  st.region = region;
  for (const auto& m : recipe.modes) {
    ScalarField* f = m.target == 0   ? &st.h
                     : m.target == 1 ? &st.s
                                     : &st.u[m.target - 2];
    const TorusGrid& g = *grid;
    for (int i = 0; i < g.n1; ++i)
      for (int j = 0; j < g.n2; ++j)
        for (int k = 0; k < g.n3; ++k) {
          auto x = g.point(i, j, k);
          (*f)[g.index(i, j, k)] +=
              m.amplitude * std::cos(m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase);
        }
  }
  return st;
}

}  // namespace anl
