#pragma once

#include <catch_amalgamated.hpp>

#include "subframe/frames.hpp"
#include "subframe/rng.hpp"

namespace subframe::testing {

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

inline Frame dss7() {
  FrameParams p;
  p.mode = "explicit";
  p.n = 7;
  p.set = {1, 2, 4};
  return frames::build(FrameFamily::dss, p);
}

inline Frame dss_qr(int q) {
  FrameParams p;
  p.mode = "qr";
  p.q = q;
  return frames::build(FrameFamily::dss, p);
}

inline Frame sized(FrameFamily family, int m, int n, std::uint64_t seed = 0, bool real = false) {
  FrameParams p;
  p.m = m;
  p.n = n;
  p.real = real;
  if (is_random_family(family)) {
    RngStream rng(seed, 0);
    return frames::build(family, p, &rng);
  }
  return frames::build(family, p);
}

inline Frame paley(FrameFamily family, int q) {
  FrameParams p;
  p.q = q;
  return frames::build(family, p);
}

inline ComplexMatrix random_hermitian(int n, RngStream& rng) {
  ComplexMatrix a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = Complex(rng.normal(), rng.normal());
  }
  return (a + a.adjoint()) / 2.0;
}

}  // namespace subframe::testing
