#include "nanotrap/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nanotrap/dynamics.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/random.hpp"

namespace nanotrap {

void SpectrumModel::validate() const {
  if (!(od_plus >= 0.0) || !(od_minus >= 0.0)) throw Error(Errc::domain, "SpectrumModel: optical depths must be >= 0");
  if (!(gamma > 0.0)) throw Error(Errc::domain, "SpectrumModel: linewidth must be positive");
  if (!std::isfinite(delta_plus) || !std::isfinite(delta_minus))
    throw Error(Errc::domain, "SpectrumModel: detunings must be finite");
}

double optical_depth(const SpectrumModel& m, double detuning) {
  const double xp = 2.0 * (detuning - m.delta_plus) / m.gamma;
  const double xm = 2.0 * (detuning - m.delta_minus) / m.gamma;
  return m.od_plus / (1.0 + xp * xp) + m.od_minus / (1.0 + xm * xm);
}

double transmission(const SpectrumModel& model, double detuning) {
  model.validate();
  return std::exp(-optical_depth(model, detuning));
}

void SpectrumData::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].counts < 0 || points[i].reference_counts < 0)
      throw Error(Errc::domain, "SpectrumData: negative counts at row " + std::to_string(i));
    if (i > 0 && !(points[i].detuning > points[i - 1].detuning))
      throw Error(Errc::domain, "SpectrumData: detunings must increase strictly (row " + std::to_string(i) + ")");
  }
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2) throw Error(Errc::domain, "linear_grid: need at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

SpectrumData simulate_spectrum(const SpectrumModel& model, const std::vector<double>& detunings,
                               double mean_reference, std::uint64_t seed) {
  model.validate();
  if (!(mean_reference > 0.0)) throw Error(Errc::domain, "simulate_spectrum: mean reference counts must be positive");
  CounterRng rng(seed);
  SpectrumData data;
  data.points.reserve(detunings.size());
  for (double d : detunings) {
    SpectrumPoint p;
    p.detuning = d;
    p.reference_counts = rng.poisson(mean_reference);
    p.counts = rng.poisson(mean_reference * transmission(model, d));
    data.points.push_back(p);
  }
  data.validate();
  return data;
}

int ParameterFit::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(Errc::domain, "ParameterFit: no parameter '" + name + "'");
  return static_cast<int>(it - names.begin());
}

double ParameterFit::value(const std::string& name) const { return result.parameters(index(name)); }
double ParameterFit::sigma(const std::string& name) const { return result.sigmas()(index(name)); }

std::vector<DataPoint> observed_optical_depth(const SpectrumData& data) {
  data.validate();
  std::vector<DataPoint> out;
  out.reserve(data.points.size());
  for (const SpectrumPoint& p : data.points) {
    const double n = p.counts > 0 ? static_cast<double>(p.counts) : 0.5;
    const double n_ref = p.reference_counts > 0 ? static_cast<double>(p.reference_counts) : 0.5;
    out.push_back({p.detuning, -std::log(n / n_ref), 1.0 / (1.0 / n + 1.0 / n_ref)});
  }
  return out;
}

ParameterFit fit_transmission(const SpectrumData& data, const SpectrumModel& initial) {
  initial.validate();
  if (data.points.size() < 25) throw Error(Errc::domain, "fit_transmission: need at least 25 spectrum points");
  const std::vector<DataPoint> points = observed_optical_depth(data);

  const ModelFunction model = [](const Eigen::VectorXd& p, double x) {
    return optical_depth(SpectrumModel{p(0), p(1), p(2), p(3), p(4)}, x);
  };
  Eigen::VectorXd start(5);
  start << initial.od_plus, initial.od_minus, initial.delta_plus, initial.delta_minus, initial.gamma;
  FitOptions options;
  constexpr double inf = std::numeric_limits<double>::infinity();
  options.lower = Eigen::VectorXd(5);
  options.lower << 0.0, 0.0, -inf, -inf, 1e-3 * initial.gamma;
  options.upper = Eigen::VectorXd::Constant(5, inf);

  ParameterFit fit{{"OD_plus", "OD_minus", "delta_plus_Hz", "delta_minus_Hz", "gamma_Hz"},
                   least_squares(model, start, points, options)};
  if (!fit.result.converged) throw Error(Errc::degenerate_fit, "fit_transmission: no convergence");
  if (fit.result.parameters(2) < fit.result.parameters(3)) {
    Eigen::PermutationMatrix<5> swap;
    swap.indices() << 1, 0, 3, 2, 4;
    fit.result.parameters = swap * fit.result.parameters;
    fit.result.covariance = swap * fit.result.covariance * swap.transpose();
  }
  return fit;
}

SpectrumModel model_from_fit(const ParameterFit& fit) {
  const Eigen::VectorXd& p = fit.result.parameters;
  return {p(0), p(1), p(2), p(3), p(4)};
}

RatioEstimate od_ratio(const ParameterFit& fit) {
  const double plus = fit.value("OD_plus"), minus = fit.value("OD_minus");
  if (!(plus > 0.0)) throw Error(Errc::domain, "od_ratio: OD_plus is zero");
  const int ip = fit.index("OD_plus"), im = fit.index("OD_minus");
  Eigen::Vector2d g(-minus / (plus * plus), 1.0 / plus);
  Eigen::Matrix2d c;
  c << fit.result.covariance(ip, ip), fit.result.covariance(ip, im), fit.result.covariance(im, ip),
      fit.result.covariance(im, im);
  return {minus / plus, std::sqrt(std::max(0.0, g.dot(c * g)))};
}

// ---------------------------------------------------------------------------
// Microwave spectra
// ---------------------------------------------------------------------------

double mw_lineshape(const std::vector<MwLine>& lines, double duration, double detuning) {
  double sum = 0.0;
  for (const MwLine& line : lines)
    sum += line.amplitude * rabi_transfer(PulseSpec::pi_pulse(duration, detuning - line.center));
  return sum;
}

std::vector<MwPoint> simulate_mw_spectrum(const std::vector<MwLine>& lines, double duration,
                                          const std::vector<double>& detunings, double noise, std::uint64_t seed) {
  if (!(noise >= 0.0)) throw Error(Errc::domain, "simulate_mw_spectrum: noise must be >= 0");
  CounterRng rng(seed);
  std::vector<MwPoint> out;
  out.reserve(detunings.size());
  for (double d : detunings) out.push_back({d, mw_lineshape(lines, duration, d) + noise * rng.normal()});
  return out;
}

MwFit fit_mw_spectrum(const std::vector<MwPoint>& data, double duration, const MwFitOptions& options) {
  const int n = options.components;
  if (n != 1 && n != 2) throw Error(Errc::domain, "fit_mw_spectrum: components must be 1 or 2");
  if (!(duration > 0.0)) throw Error(Errc::domain, "fit_mw_spectrum: pulse duration must be positive");
  const int parameters = 2 * n + (options.free_duration ? 1 : 0);
  if (static_cast<int>(data.size()) < parameters)
    throw Error(Errc::domain, "fit_mw_spectrum: fewer points than parameters");

  const double fwhm0 = pi_pulse_fwhm(duration);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < data.size(); ++i)
    if (data[i].signal > data[peak].signal) peak = i;
  std::vector<MwLine> guess{{data[peak].detuning, data[peak].signal}};
  if (n == 2) {
    std::ptrdiff_t second = -1;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (std::abs(data[i].detuning - data[peak].detuning) <= fwhm0 || data[i].signal < 0.3 * data[peak].signal)
        continue;
      if (second < 0 || data[i].signal > data[static_cast<std::size_t>(second)].signal)
        second = static_cast<std::ptrdiff_t>(i);
    }
    if (second >= 0) {
      guess.push_back({data[static_cast<std::size_t>(second)].detuning, data[static_cast<std::size_t>(second)].signal});
    } else {
      guess = {{data[peak].detuning - 0.25 * fwhm0, data[peak].signal},
               {data[peak].detuning + 0.25 * fwhm0, data[peak].signal}};
    }
  }

  Eigen::VectorXd start(parameters);
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) {
    start(2 * k) = guess[static_cast<std::size_t>(k)].amplitude;
    start(2 * k + 1) = guess[static_cast<std::size_t>(k)].center;
    names.push_back("amplitude_" + std::to_string(k + 1));
    names.push_back("center_" + std::to_string(k + 1) + "_Hz");
  }
  if (options.free_duration) {
    start(2 * n) = duration;
    names.push_back("duration_s");
  }
  const ModelFunction model = [n, duration, free = options.free_duration](const Eigen::VectorXd& p, double x) {
    const double tau = free ? p(2 * n) : duration;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += p(2 * k) * rabi_transfer(PulseSpec::pi_pulse(tau, x - p(2 * k + 1)));
    return sum;
  };

  const double weight = options.noise > 0.0 ? 1.0 / (options.noise * options.noise) : 1.0;
  std::vector<DataPoint> points;
  points.reserve(data.size());
  for (const MwPoint& p : data) points.push_back({p.detuning, p.signal, weight});

  FitOptions fit_options;
  constexpr double inf = std::numeric_limits<double>::infinity();
  fit_options.lower = Eigen::VectorXd::Constant(parameters, -inf);
  fit_options.upper = Eigen::VectorXd::Constant(parameters, inf);
  for (int k = 0; k < n; ++k) fit_options.lower(2 * k) = 0.0;
  if (options.free_duration) fit_options.lower(2 * n) = 1e-3 * duration;

  MwFit out;
  out.fit = {names, least_squares(model, start, points, fit_options)};
  const FitResult& r = out.fit.result;
  if (!r.converged) throw Error(Errc::degenerate_fit, "fit_mw_spectrum: no convergence");
  out.duration = options.free_duration ? r.parameters(2 * n) : duration;
  out.fwhm = pi_pulse_fwhm(out.duration);
  const Eigen::VectorXd sig = r.sigmas();
  for (int k = 0; k < n; ++k) out.lines.push_back({r.parameters(2 * k + 1), r.parameters(2 * k)});
  if (n == 2) {
    out.splitting = std::abs(r.parameters(1) - r.parameters(3));
    if (out.splitting < 0.1 * out.fwhm)
      throw Error(Errc::degenerate_fit, "fit_mw_spectrum: line centres collapse within FWHM/10");
    for (int k = 0; k < n; ++k)
      if (r.parameters(2 * k) < 3.0 * sig(2 * k))
        throw Error(Errc::degenerate_fit, "fit_mw_spectrum: component " + std::to_string(k + 1) + " not resolved");
    const double var = r.covariance(1, 1) + r.covariance(3, 3) - 2.0 * r.covariance(1, 3);
    out.splitting_sigma = std::sqrt(std::max(0.0, var));
    std::sort(out.lines.begin(), out.lines.end(), [](const MwLine& a, const MwLine& b) { return a.center < b.center; });
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

template <typename Row>
void read_rows(std::istream& in, const std::string& header, std::size_t columns, Row&& row) {
  std::string line;
  bool seen_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != header) throw Error(Errc::config, "CSV: expected header '" + header + "'");
      seen_header = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != columns)
      throw Error(Errc::config, "CSV line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                                    " columns");
    try {
      row(fields);
    } catch (const std::logic_error&) {
      throw Error(Errc::config, "CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  if (!seen_header) throw Error(Errc::config, "CSV: missing header '" + header + "'");
}

}  // namespace

void write_spectrum_csv(std::ostream& out, const SpectrumData& data) {
  out.precision(17);
  out << "detuning_Hz,counts,reference_counts\n";
  for (const SpectrumPoint& p : data.points) out << p.detuning << ',' << p.counts << ',' << p.reference_counts << '\n';
}

SpectrumData read_spectrum_csv(std::istream& in) {
  SpectrumData data;
  read_rows(in, "detuning_Hz,counts,reference_counts", 3, [&](const std::vector<std::string>& f) {
    data.points.push_back({std::stod(f[0]), std::stoll(f[1]), std::stoll(f[2])});
  });
  data.validate();
  return data;
}

void write_mw_csv(std::ostream& out, const std::vector<MwPoint>& data) {
  out.precision(17);
  out << "delta_Hz,probability\n";
  for (const MwPoint& p : data) out << p.detuning << ',' << p.signal << '\n';
}

std::vector<MwPoint> read_mw_csv(std::istream& in) {
  std::vector<MwPoint> data;
  read_rows(in, "delta_Hz,probability", 2, [&](const std::vector<std::string>& f) {
    data.push_back({std::stod(f[0]), std::stod(f[1])});
  });
  return data;
}

}  // namespace nanotrap
