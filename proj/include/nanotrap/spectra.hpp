#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nanotrap/numerics.hpp"

namespace nanotrap {

/// Two-Lorentzian probe transmission; detunings and linewidth in Hz.
struct SpectrumModel {
  double od_plus = 0.0;
  double od_minus = 0.0;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double gamma = 1.0;

  void validate() const;
};

/// T = exp(-sum_k OD_k / (1 + 4 (delta - delta_k)^2 / gamma^2)).
double transmission(const SpectrumModel& model, double detuning);
/// -ln T, the summed optical depth at `detuning`.
double optical_depth(const SpectrumModel& model, double detuning);

struct SpectrumPoint {
  double detuning = 0.0;  // Hz
  std::int64_t counts = 0;
  std::int64_t reference_counts = 0;
};

struct SpectrumData {
  std::vector<SpectrumPoint> points;

  /// Throws Errc::domain for negative counts or non-increasing detunings.
  void validate() const;
};

/// Poisson transmitted counts with mean reference * T(delta), and Poisson
/// reference counts with mean `mean_reference`, one generator per call.
SpectrumData simulate_spectrum(const SpectrumModel& model, const std::vector<double>& detunings,
                               double mean_reference, std::uint64_t seed);

std::vector<double> linear_grid(double lo, double hi, int points);

/// Parameters with names, for reports.
struct ParameterFit {
  std::vector<std::string> names;
  FitResult result;

  double value(const std::string& name) const;
  double sigma(const std::string& name) const;
  int index(const std::string& name) const;
};

/// Observed -ln T per bin with its Poisson variance 1/n + 1/n_ref. Zero
/// counts are replaced by 0.5 before taking logs.
std::vector<DataPoint> observed_optical_depth(const SpectrumData& data);

/// Fit of (OD_plus, OD_minus, delta_plus, delta_minus, gamma) in -ln T
/// space; the two lines are relabelled afterwards so delta_plus > delta_minus.
ParameterFit fit_transmission(const SpectrumData& data, const SpectrumModel& initial);
SpectrumModel model_from_fit(const ParameterFit& fit);

struct RatioEstimate {
  double value = 0.0;
  double sigma = 0.0;
};
/// OD_minus / OD_plus with first-order propagated uncertainty.
RatioEstimate od_ratio(const ParameterFit& fit);

// ---------------------------------------------------------------------------
// Microwave spectra
// ---------------------------------------------------------------------------

struct MwLine {
  double center = 0.0;     // Hz
  double amplitude = 1.0;  // transfer fraction at the line centre
};

struct MwPoint {
  double detuning = 0.0;  // Hz
  double signal = 0.0;
};

/// Sum of Fourier-limited pi-pulse lines of duration `duration`.
double mw_lineshape(const std::vector<MwLine>& lines, double duration, double detuning);

/// Lineshape plus independent Gaussian noise of standard deviation `noise`.
std::vector<MwPoint> simulate_mw_spectrum(const std::vector<MwLine>& lines, double duration,
                                          const std::vector<double>& detunings, double noise, std::uint64_t seed);

struct MwFitOptions {
  int components = 1;
  bool free_duration = false;  // fit the pulse length (Omega stays pi / tau)
  double noise = 0.0;          // point sigma; 0 uses unit weights
};

struct MwFit {
  ParameterFit fit;
  std::vector<MwLine> lines;      // sorted by centre
  double duration = 0.0;
  double fwhm = 0.0;
  double splitting = 0.0;         // |c1 - c2|, two components only
  double splitting_sigma = 0.0;
};

/// Fit one or two Fourier-limited lines. Initial centres: the highest point,
/// plus for two lines the highest point more than one FWHM away with at
/// least 30% of the peak height, else peak -+ FWHM/4. Throws
/// Errc::degenerate_fit when two centres fall within FWHM/10 or a fitted
/// amplitude is not significant at 3 sigma.
MwFit fit_mw_spectrum(const std::vector<MwPoint>& data, double duration, const MwFitOptions& options = {});

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_spectrum_csv(std::ostream& out, const SpectrumData& data);
SpectrumData read_spectrum_csv(std::istream& in);
void write_mw_csv(std::ostream& out, const std::vector<MwPoint>& data);
std::vector<MwPoint> read_mw_csv(std::istream& in);

}  // namespace nanotrap
