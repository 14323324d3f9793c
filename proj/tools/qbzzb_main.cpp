// qbzzb: Bell-Ziv-Zakai mean-square-error lower bounds for Gaussian priors.
//
// Subcommands: lambda, bound, scan, waveform, verify. All numeric output is
// deterministic (12 significant digits) and every output file carries the
// lambda constant and a digest of the resolved configuration plus input bytes.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbzzb/bound.hpp"
#include "qbzzb/io.hpp"
#include "qbzzb/oracle.hpp"
#include "qbzzb/prior.hpp"
#include "qbzzb/resource.hpp"
#include "qbzzb/specfun.hpp"
#include "qbzzb/waveform.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitContract = 3;
constexpr int kExitVerifyFailed = 4;

struct CommonOpts {
  std::string out;            // empty = stdout
  std::string format = "csv";
  double rel_tol = 1e-8;
};

std::string slurp_or_empty(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Digest over the canonical option string plus the bytes of every input file.
std::string config_digest(const std::string& canonical, const std::vector<std::string>& inputs) {
  std::string blob = canonical;
  for (const auto& p : inputs) {
    blob += "|file:" + p + "=";
    blob += slurp_or_empty(p);
  }
  return qbzzb::io::fnv1a64_hex(blob);
}

qbzzb::io::Provenance make_provenance(const std::string& canonical,
                                      const std::vector<std::string>& inputs) {
  return {qbzzb::lambda_constant<double>().lambda, config_digest(canonical, inputs)};
}

template <typename WriteFn>
void with_output(const std::string& out, WriteFn&& write) {
  if (out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open output file: " + out);
  }
  write(f);
}

std::vector<double> geometric_grid(const std::string& ratios_arg) {
  double start = 0, stop = 0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(ratios_arg);
  if (!(ss >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' || !ss.eof()) {
    throw std::invalid_argument("--ratios must look like start:stop:count, e.g. 1e-3:1e3:50");
  }
  if (!(start > 0) || !(stop > 0) || count < 1) {
    throw std::invalid_argument("--ratios requires positive endpoints and count >= 1");
  }
  std::vector<double> grid(count);
  grid.front() = start;
  if (count > 1) {
    const double log_step = std::log(stop / start) / (count - 1);
    for (int i = 1; i + 1 < count; ++i) {
      grid[i] = start * std::exp(log_step * i);
    }
    grid.back() = stop;
  }
  return grid;
}

std::optional<double> parse_h0(const std::string& arg) {
  if (arg == "median") return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(arg.c_str(), &end);
  if (end != arg.c_str() + arg.size() || arg.empty()) {
    throw std::invalid_argument("--h0 must be 'median' or a real number");
  }
  return v;
}

int run_lambda(double tol, const CommonOpts& opts) {
  const auto k = qbzzb::solve_lambda(tol);
  const std::string canonical =
      "command=lambda;tol=" + qbzzb::io::format_sig(tol) + ";format=text";
  const auto prov = make_provenance(canonical, {});
  with_output(opts.out, [&](std::ostream& os) {
    if (!opts.out.empty()) {
      os << "# lambda = " << qbzzb::io::format_sig(k.lambda) << "\n";
      os << "# config = " << prov.config_digest << "\n";
    }
    os << "phi=" << qbzzb::io::format_sig(k.phi) << "\n";
    os << "lambda=" << qbzzb::io::format_sig(k.lambda) << "\n";
  });
  return 0;
}

int run_bound(const std::string& prior_path, const std::string& spectrum_path,
              const std::vector<double>& u_values, const std::string& h0_arg,
              const CommonOpts& opts) {
  const auto prior = qbzzb::io::load_prior(prior_path);
  const auto spectrum = qbzzb::io::load_spectrum(spectrum_path);
  const qbzzb::Direction<double> u{
      Eigen::Map<const Eigen::VectorXd>(u_values.data(), static_cast<Eigen::Index>(u_values.size()))};
  const auto h0 = parse_h0(h0_arg);

  const auto result = qbzzb::directional_bound(prior, spectrum, u, h0, opts.rel_tol);

  std::string canonical = "command=bound;prior=" + prior_path + ";spectrum=" + spectrum_path + ";u=";
  for (std::size_t i = 0; i < u_values.size(); ++i) {
    canonical += (i ? "," : "") + qbzzb::io::format_sig(u_values[i]);
  }
  canonical += ";h0=" + h0_arg + ";rel_tol=" + qbzzb::io::format_sig(opts.rel_tol) +
               ";format=" + opts.format;
  const auto prov = make_provenance(canonical, {prior_path, spectrum_path});

  with_output(opts.out, [&](std::ostream& os) {
    if (opts.format == "json") {
      qbzzb::io::write_bound_json(os, result, prov);
    } else {
      qbzzb::io::write_bound_csv(os, result, prov);
    }
  });
  return 0;
}

int run_scan(const std::string& ratios_arg, const CommonOpts& opts) {
  const auto grid = geometric_grid(ratios_arg);
  const auto rows = qbzzb::scan(grid, opts.rel_tol);
  const std::string canonical = "command=scan;ratios=" + ratios_arg +
                                ";rel_tol=" + qbzzb::io::format_sig(opts.rel_tol) +
                                ";format=" + opts.format;
  const auto prov = make_provenance(canonical, {});
  with_output(opts.out, [&](std::ostream& os) {
    if (opts.format == "json") {
      qbzzb::io::write_scan_json(os, rows, prov);
    } else {
      qbzzb::io::write_scan_csv(os, rows, prov);
    }
  });
  return 0;
}

int run_waveform(double ou_sigma0, double ou_tcorr, const std::string& flux_path, int t_index,
                 const CommonOpts& opts) {
  const auto flux = qbzzb::io::load_flux_csv(flux_path);
  const qbzzb::OUProcess<double> ou(ou_sigma0, ou_tcorr, flux.grid());

  std::vector<qbzzb::io::WaveformRow> rows;
  const auto add_row = [&](Eigen::Index k) {
    rows.push_back({flux.grid()[k], qbzzb::h_plus_time_upper(ou, flux, k),
                    qbzzb::hlimit_time(ou, flux, k)});
  };
  if (t_index >= 0) {
    add_row(t_index);
  } else {
    for (Eigen::Index k = 0; k < flux.size(); ++k) add_row(k);
  }

  const std::string canonical =
      "command=waveform;ou_sigma0=" + qbzzb::io::format_sig(ou_sigma0) +
      ";ou_tcorr=" + qbzzb::io::format_sig(ou_tcorr) + ";flux=" + flux_path +
      ";t_index=" + std::to_string(t_index) + ";format=" + opts.format;
  const auto prov = make_provenance(canonical, {flux_path});

  with_output(opts.out, [&](std::ostream& os) {
    if (opts.format == "json") {
      qbzzb::io::write_waveform_json(os, rows, prov);
    } else {
      qbzzb::io::write_waveform_csv(os, rows, prov);
    }
  });
  return 0;
}

int run_verify(const std::string& suite, const CommonOpts& opts) {
  (void)suite;  // only "default" is accepted by the option check
  const auto reports = qbzzb::default_verify_suite<double>();
  const std::string canonical = "command=verify;suite=" + suite + ";format=" + opts.format;
  const auto prov = make_provenance(canonical, {});
  with_output(opts.out, [&](std::ostream& os) {
    if (opts.format == "csv") {
      qbzzb::io::write_verify_csv(os, reports, prov);
    } else {
      qbzzb::io::write_verify_json(os, reports, prov);
    }
  });
  bool all_pass = true;
  for (const auto& r : reports) {
    if (!r.pass) {
      std::cerr << "verification FAILED: " << r.instance_id
                << " margin=" << qbzzb::io::format_sig(r.margin) << "\n";
      all_pass = false;
    }
  }
  return all_pass ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-Ziv-Zakai mean-square-error lower bounds for Gaussian priors"};
  app.require_subcommand(1);

  // lambda
  auto* cmd_lambda = app.add_subcommand("lambda", "solve the cosine-bound slope constant");
  double lambda_tol = 1e-12;
  std::string lambda_out;
  cmd_lambda->add_option("--tol", lambda_tol, "solver tolerance")->capture_default_str();
  cmd_lambda->add_option("--out", lambda_out, "output file (default: stdout)");

  // bound
  auto* cmd_bound = app.add_subcommand("bound", "directional error lower bound");
  std::string bound_prior, bound_spectrum, bound_h0 = "median", bound_out,
              bound_format = "json";
  std::vector<double> bound_u;
  double bound_rel_tol = 1e-8;
  cmd_bound->add_option("--prior", bound_prior, "prior file (.json or .csv)")->required();
  cmd_bound->add_option("--spectrum", bound_spectrum, "spectrum JSON file")->required();
  cmd_bound->add_option("--u", bound_u, "direction weights, comma separated")
      ->required()
      ->delimiter(',');
  cmd_bound->add_option("--h0", bound_h0, "offset H0: 'median' or a real")
      ->capture_default_str();
  cmd_bound->add_option("--rel-tol", bound_rel_tol, "quadrature relative tolerance")
      ->capture_default_str();
  cmd_bound->add_option("--out", bound_out, "output file (default: stdout)");
  cmd_bound->add_option("--format", bound_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // scan
  auto* cmd_scan = app.add_subcommand("scan", "normalized bound over a tau0/tau_F ratio grid");
  std::string scan_ratios = "1e-3:1e3:50", scan_out, scan_format = "csv";
  double scan_rel_tol = 1e-8;
  cmd_scan->add_option("--ratios", scan_ratios, "geometric grid start:stop:count")
      ->capture_default_str();
  cmd_scan->add_option("--rel-tol", scan_rel_tol, "quadrature relative tolerance")
      ->capture_default_str();
  cmd_scan->add_option("--out", scan_out, "output file (default: stdout)");
  cmd_scan->add_option("--format", scan_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // waveform
  auto* cmd_wave = app.add_subcommand("waveform", "time-resolved limits for an OU phase prior");
  double wave_sigma0 = 0, wave_tcorr = 0;
  std::string wave_flux, wave_out, wave_format = "csv";
  int wave_t_index = -1;
  cmd_wave->add_option("--ou-sigma0", wave_sigma0, "OU phase variance")->required();
  cmd_wave->add_option("--ou-tcorr", wave_tcorr, "OU correlation time T0")->required();
  cmd_wave->add_option("--flux", wave_flux, "flux CSV with columns t,flux")->required();
  cmd_wave->add_option("--t-index", wave_t_index, "single grid index (default: all)")
      ->capture_default_str();
  cmd_wave->add_option("--out", wave_out, "output file (default: stdout)");
  cmd_wave->add_option("--format", wave_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "run the oracle verification suite");
  std::string verify_suite = "default", verify_out, verify_format = "json";
  cmd_verify->add_option("--suite", verify_suite, "suite name")
      ->check(CLI::IsMember({"default"}))
      ->capture_default_str();
  cmd_verify->add_option("--out", verify_out, "output file (default: stdout)");
  cmd_verify->add_option("--format", verify_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (cmd_lambda->parsed()) {
      CommonOpts opts;
      opts.out = lambda_out;
      return run_lambda(lambda_tol, opts);
    }
    if (cmd_bound->parsed()) {
      CommonOpts opts{bound_out, bound_format, bound_rel_tol};
      return run_bound(bound_prior, bound_spectrum, bound_u, bound_h0, opts);
    }
    if (cmd_scan->parsed()) {
      CommonOpts opts{scan_out, scan_format, scan_rel_tol};
      return run_scan(scan_ratios, opts);
    }
    if (cmd_wave->parsed()) {
      CommonOpts opts{wave_out, wave_format, 1e-8};
      return run_waveform(wave_sigma0, wave_tcorr, wave_flux, wave_t_index, opts);
    }
    if (cmd_verify->parsed()) {
      CommonOpts opts{verify_out, verify_format, 1e-8};
      return run_verify(verify_suite, opts);
    }
  } catch (const qbzzb::io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::domain_error& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::invalid_argument& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::out_of_range& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
