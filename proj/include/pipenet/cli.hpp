#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipenet/analysis.hpp"
#include "pipenet/csv.hpp"
#include "pipenet/netspec.hpp"
#include "pipenet/simulate.hpp"

namespace pipenet::cli {

inline constexpr double kMasonTolerance = 1e-6;

/// Significant digits for printed numbers, from PIPENET_PRECISION.
inline int precision_from_env() {
  const char* env = std::getenv("PIPENET_PRECISION");
  if (!env || !*env) return csv::kDefaultPrecision;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 17) throw ConfigError("PIPENET_PRECISION must be an integer in [1, 17]");
  return static_cast<int>(v);
}

inline NetworkSpec load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return parse_netspec(text);
  } catch (const ParseError& e) {
    std::string msg;
    for (const auto& d : e.diagnostics()) msg += (msg.empty() ? "" : "\n") + path + ": " + d.str();
    throw ConfigError(msg);
  }
}

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

/// Accepts a declared output name, a canonical label, or the short form
/// <p|q|T><element><l|r> (e.g. "p3r" for P3.r.p when P3 exists).
inline SignalLabel resolve_output(const std::string& token, const StateSpaceModel& model,
                                  const std::vector<OutputDecl>& declared) {
  for (const auto& o : declared)
    if (o.name == token) return o.signal;
  try {
    const SignalLabel l = SignalLabel::parse(token);
    if (find_label(model.output_labels, l) >= 0) return l;
  } catch (const ConfigError&) {
  }
  if (token.size() >= 3) {
    const char q = token.front(), s = token.back();
    const std::string mid = token.substr(1, token.size() - 2);
    std::vector<SignalLabel> hits;
    for (const auto& l : model.output_labels) {
      const bool qm = (q == 'p' && l.quantity == Quantity::pressure) || (q == 'q' && l.quantity == Quantity::flow) ||
                      (q == 'T' && l.quantity == Quantity::temperature);
      const bool sm = (s == 'l' && l.side == Side::left) || (s == 'r' && l.side == Side::right);
      if (qm && sm && (iequals(l.element, mid) || iequals(l.element, "P" + mid))) hits.push_back(l);
    }
    if (hits.size() == 1) return hits.front();
  }
  throw ConfigError("unknown output '" + token + "'");
}

inline std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

struct Network {
  NetworkSpec spec;
  ElaboratedNetwork net;
  StateSpaceModel closed;
};

inline Network build(const std::string& file, const std::vector<std::string>& select, std::ostream& err) {
  Network n{load(file), {}, {}};
  n.net = elaborate(n.spec);
  for (const auto& w : n.net.warnings) err << "warning: " << w << '\n';
  n.closed = closed_model(n.net);
  const auto tokens = split_list(select);
  if (!tokens.empty()) {
    std::vector<SignalLabel> keep;
    for (const auto& t : tokens) keep.push_back(resolve_output(t, n.closed, n.spec.outputs));
    n.closed = select_outputs(n.closed, keep);
  }
  return n;
}

inline void dump_matrices(const StateSpaceModel& m, const std::string& dir, int precision) {
  std::filesystem::create_directories(dir);
  const auto st = render(m.state_labels), in = render(m.input_labels), out = render(m.output_labels);
  const auto write = [&](const char* name, const Eigen::MatrixXd& M, const std::vector<std::string>& rows,
                         const std::vector<std::string>& cols) {
    std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + (std::filesystem::path(dir) / name).string());
    csv::write_matrix(os, M, rows, cols, precision);
  };
  write("A.csv", m.A, st, st);
  write("B.csv", m.B, st, in);
  write("C.csv", m.C, out, st);
  write("D.csv", m.D, out, in);
}

inline std::vector<std::string> pair_columns(const StateSpaceModel& m, const char* suffix) {
  std::vector<std::string> cols;
  for (const auto& o : m.output_labels)
    for (const auto& i : m.input_labels) cols.push_back(o.str() + "/" + i.str() + suffix);
  return cols;
}

}  // namespace detail

/// Runs the command line `args` (args[0] is the program name). Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build and analyse linear state-space models of gas pipe networks"};
  app.require_subcommand(1);
  std::string file;
  std::vector<std::string> select;

  auto* build = app.add_subcommand("build", "print model dimensions and labels");
  std::string dump_dir;
  build->add_option("file", file, "network description")->required();
  build->add_option("--dump-matrices", dump_dir, "write A.csv, B.csv, C.csv, D.csv into this directory");
  build->add_option("--select", select, "outputs to keep (comma separated)");

  auto* dcgain = app.add_subcommand("dcgain", "steady-state gains as CSV");
  bool flows_only = false;
  dcgain->add_option("file", file)->required();
  dcgain->add_flag("--flows-only", flows_only, "rows are the left-flange flows of all pipes");
  dcgain->add_option("--select", select);

  auto* eig = app.add_subcommand("eig", "eigenvalues as CSV");
  eig->add_option("file", file)->required();

  auto* bode = app.add_subcommand("bode", "frequency response as CSV");
  double wmin = 1e-3, wmax = 1e3;
  int npts = 0;
  bode->add_option("file", file)->required();
  bode->add_option("--wmin", wmin, "lowest angular frequency [rad/s]");
  bode->add_option("--wmax", wmax, "highest angular frequency [rad/s]");
  bode->add_option("--n", npts, "number of points (default: 200 per decade)");
  bode->add_option("--select", select);

  auto* sim = app.add_subcommand("sim", "linear time response as CSV");
  std::string inputs_csv;
  double dt = 1e-3, t_end = 0.0;
  sim->add_option("file", file)->required();
  sim->add_option("--inputs", inputs_csv, "CSV with column t and one column per input");
  sim->add_option("--dt", dt, "time step [s]");
  sim->add_option("--T", t_end, "end time [s]");
  sim->add_option("--select", select);

  auto* mason = app.add_subcommand("mason", "compare closed model with (I-Q)^-1 P");
  double mwmin = 1e-3, mwmax = 1e3;
  int mn = 20;
  mason->add_option("file", file)->required();
  mason->add_option("--wmin", mwmin);
  mason->add_option("--wmax", mwmax);
  mason->add_option("--n", mn);

  auto* sweep = app.add_subcommand("sweep", "max real eigenvalue versus a gain");
  std::string element;
  double kmin = 1.0, kmax = 10.0;
  int kn = 10;
  sweep->add_option("file", file)->required();
  sweep->add_option("--element", element, "gain element id")->required();
  sweep->add_option("--kmin", kmin);
  sweep->add_option("--kmax", kmax);
  sweep->add_option("--n", kn);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    const int prec = precision_from_env();
    std::ostringstream buf;  // nothing reaches `out` unless the command succeeds

    if (build->parsed()) {
      const auto n = detail::build(file, select, err);
      const auto& m = n.closed;
      buf << "states=" << m.states() << " inputs=" << m.inputs() << " outputs=" << m.outputs() << '\n';
      const auto list = [&](const char* title, const std::vector<SignalLabel>& ls) {
        buf << title << ':';
        for (const auto& l : ls) buf << ' ' << l.str();
        buf << '\n';
      };
      list("states", m.state_labels);
      list("inputs", m.input_labels);
      list("outputs", m.output_labels);
      if (!dump_dir.empty()) detail::dump_matrices(m, dump_dir, prec);
    } else if (dcgain->parsed()) {
      const auto n = detail::build(file, select, err);
      const auto& m = n.closed;
      if (flows_only) {
        const Eigen::MatrixXd sx = state_dc_gain(m);
        std::vector<std::string> rows;
        Eigen::MatrixXd G(static_cast<Eigen::Index>(n.net.pipes.size()), m.inputs());
        for (const auto& p : n.net.pipes) {
          const SignalLabel q = label(p.pipe.id, Side::left, Quantity::flow);
          const auto idx = find_label(m.state_labels, q);
          if (idx < 0) throw ConfigError("flow " + q.str() + " is not a state of the closed model");
          G.row(static_cast<Eigen::Index>(rows.size())) = sx.row(idx);
          rows.push_back(q.str());
        }
        csv::write_matrix(buf, G, rows, render(m.input_labels), prec);
      } else {
        csv::write_matrix(buf, dc_gain(m), render(m.output_labels), render(m.input_labels), prec);
      }
    } else if (eig->parsed()) {
      const auto n = detail::build(file, {}, err);
      csv::write_row(buf, {"index", "real", "imag"});
      int i = 0;
      for (const Complex& e : eigenvalues(n.closed))
        csv::write_row(buf, {std::to_string(i++), csv::number(e.real(), prec), csv::number(e.imag(), prec)});
    } else if (bode->parsed()) {
      const auto n = detail::build(file, select, err);
      const auto& m = n.closed;
      const auto grid = npts > 0 ? log_grid(wmin, wmax, npts) : decade_grid(wmin, wmax);
      const FrequencyResponse fr = freq_response(m, grid);
      std::vector<std::string> header{"omega"};
      for (const auto& c : detail::pair_columns(m, ".mag")) header.push_back(c);
      for (const auto& c : detail::pair_columns(m, ".phase_deg")) header.push_back(c);
      header.push_back("flagged");
      csv::write_row(buf, header);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<std::string> row{csv::number(grid[k], prec)};
        const auto& H = fr.H[k];
        for (Eigen::Index i = 0; i < H.rows(); ++i)
          for (Eigen::Index j = 0; j < H.cols(); ++j) row.push_back(csv::number(std::abs(H(i, j)), prec));
        for (Eigen::Index i = 0; i < H.rows(); ++i)
          for (Eigen::Index j = 0; j < H.cols(); ++j)
            row.push_back(csv::number(std::arg(H(i, j)) * 180.0 / std::numbers::pi, prec));
        row.push_back(fr.flagged[k] ? "1" : "0");
        csv::write_row(buf, row);
      }
    } else if (sim->parsed()) {
      const auto n = detail::build(file, select, err);
      const auto& m = n.closed;
      TimeSeries u;
      if (!inputs_csv.empty()) {
        std::ifstream in(inputs_csv, std::ios::binary);
        if (!in) throw ConfigError("cannot read " + inputs_csv);
        u = csv::read_series(in);
        if (t_end > 0.0 && u.times.back() < t_end) {
          u.times.push_back(t_end);
          for (auto& c : u.channels) c.push_back(c.back());
        }
      } else {
        if (!(t_end > 0.0)) throw ConfigError("sim needs --inputs or --T");
        u = constant_inputs(render(m.input_labels), Eigen::VectorXd::Zero(m.inputs()), t_end);
      }
      if (t_end > 0.0) {
        while (u.times.size() > 1 && u.times[u.times.size() - 2] >= t_end) {
          u.times.pop_back();
          for (auto& c : u.channels) c.pop_back();
        }
        if (u.times.back() > t_end) u.times.back() = t_end;
      }
      const auto res = simulate_lti(m, u, Eigen::VectorXd::Zero(m.states()), dt, n.net.connection.external_names);
      csv::write_series(buf, res.outputs, prec);
    } else if (mason->parsed()) {
      const auto n = detail::build(file, {}, err);
      const MasonResult r = mason_check(n.net.stacked, n.net.connection, log_grid(mwmin, mwmax, mn));
      buf << "max_deviation=" << csv::number(r.max_deviation, prec) << '\n';
      buf << "flagged=" << r.flagged_samples << '\n';
      out << buf.str();
      if (r.flagged_samples > 0 || !(r.max_deviation <= kMasonTolerance)) {
        err << "error: transfer functions disagree (tolerance " << kMasonTolerance << ")\n";
        return 1;
      }
      return 0;
    } else if (sweep->parsed()) {
      const auto spec = load(file);
      if (kn < 1) throw ConfigError("--n must be >= 1");
      std::vector<double> ks;
      for (int i = 0; i < kn; ++i) ks.push_back(kn == 1 ? kmin : kmin + (kmax - kmin) * i / (kn - 1));
      const auto worst = stability_margin_sweep(spec, element, ks);
      csv::write_row(buf, {"k", "max_real"});
      for (std::size_t i = 0; i < ks.size(); ++i)
        csv::write_row(buf, {csv::number(ks[i], prec), csv::number(worst[i], prec)});
    }
    out << buf.str();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pipenet::cli
