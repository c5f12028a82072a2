#pragma once

#include <filesystem>
#include <vector>

#include "subframe/spectra.hpp"

namespace subframe {

/// Source variance and distortion for the analog codec. beta = k/m and
/// p = k/n are taken from the subset at hand.
struct RdfConfig {
  double sigma_x2 = 1.0;
  double distortion = 1.0;
};

struct CapacityConfig {
  double snr = 1.0;
  bool practical = false;  // drop the identity inside the log-determinant
};

struct LsEncoding {
  ComplexVector x_tilde;  // length m
  double residual = 0.0;  // ||F_S^H x_tilde - x_s||
};

struct RateResult {
  double rate = 0.0;  // bits per source sample
  bool infinite = false;
  double beta = 0.0;
  double p = 0.0;
  double psi_mse = 0.0;
};

/// Subset-averaged quantity with the raw finite per-subset values.
struct SubsetSamples {
  SubsetAverage average;
  std::vector<double> values;
};

namespace coding {

/// Minimum-norm x with F_S^H x = x_s: x = F_S (F_S^H F_S)^(-1) x_s. Needs |S| <= m
/// and a Gram with smallest eigenvalue above 1e-12 times the largest.
LsEncoding ls_encode(const Frame& f, const SelectionMask& s, const ComplexVector& x_s);

/// (p / 2 beta) log2(1 + (sigma_x^2 / D) beta Psi_MSE(F_S)).
RateResult ecdq_rate(const Frame& f, const SelectionMask& s, const RdfConfig& cfg);

/// Same rate from the encoder side: (m / 2n) log2(1 + sigma_x^2 tr(G_S^-1) / (m D)).
RateResult ecdq_rate_direct(const Frame& f, const SelectionMask& s, const RdfConfig& cfg);

/// trials == 0 requests exact enumeration.
SubsetSamples operational_rdf(const Frame& f, const SelectionModel& model, const RdfConfig& cfg,
                              std::size_t trials, const RngStream* rng);

/// (1/m) log2 det(I + snr G), or (1/m) log2 det(snr G) in practical mode,
/// evaluated from the eigenvalues of G. Returns -infinity for a singular
/// practical-mode Gram.
double log_det_capacity(const ComplexMatrix& gram, int m, double snr, bool practical);

/// Same value through a direct Cholesky determinant.
double log_det_capacity_direct(const ComplexMatrix& gram, int m, double snr, bool practical);

SubsetSamples noma_capacity(const Frame& f, const SelectionModel& model, const CapacityConfig& cfg,
                            std::size_t trials, const RngStream* rng);

/// Subset average of snr^(-m) / det(F_S F_S^H) over k-subsets, k >= m.
SubsetSamples stc_bound(const Frame& f, int k, double snr, std::size_t trials,
                        const RngStream* rng);

/// One value per line under a "value" header.
void write_samples_csv(const std::vector<double>& values, const std::filesystem::path& path);

}  // namespace coding
}  // namespace subframe
