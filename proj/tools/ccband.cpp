// Command-line front end: wires configs to the computational modules and
// emits CSV artifacts plus companion plot scripts.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "ccband/config.hpp"
#include "ccband/csv.hpp"
#include "ccband/ladder.hpp"
#include "ccband/packet.hpp"
#include "ccband/singularity.hpp"

namespace fs = std::filesystem;
using namespace ccband;

namespace {

struct GlobalOpts {
  std::string out_dir = ".";
  int threads = (int)std::max(1u, std::thread::hardware_concurrency());
  std::string config_file;
  bool show_config = false;
};

fs::path out_path(GlobalOpts const& g, std::string const& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void write_bands_csv(fs::path const& path, std::vector<BandPoint> const& table) {
  CsvWriter csv(path);
  csv.header({"q", "band_index", "re_E", "im_E", "kappa"});
  for (auto const& p : table)
    csv.row({p.q, (double)p.band, p.energy.real(), p.energy.imag(), p.kappa});
}

void write_trace_csv(fs::path const& path, DiffractionTrace const& tr) {
  CsvWriter csv(path);
  csv.header({"t", "l", "re_c", "im_c", "abs_c"});
  for (std::size_t j = 0; j < tr.times.size(); ++j)
    for (int l = -tr.n_trunc; l <= tr.n_trunc; ++l) {
      cplx c = tr.at((int)j, l);
      csv.row({tr.times[j], (double)l, c.real(), c.imag(), std::abs(c)});
    }
}

void write_field_csv(fs::path const& path, WaveField const& f, double lambda,
                     double v0, double w) {
  CsvWriter csv(path);
  char buf[160];
  std::snprintf(buf, sizeof buf, "t=%.12g lambda=%.12g V0=%.12g w=%.12g",
                f.time, lambda, v0, w);
  csv.comment(buf);
  csv.header({"x", "re_psi", "im_psi", "abs_psi"});
  for (int j = 0; j < f.points; ++j)
    csv.row({f.x(j), f.values[j].real(), f.values[j].imag(),
             std::abs(f.values[j])});
}

void write_peaks_csv(fs::path const& path, PeakTrace const& tr) {
  CsvWriter csv(path);
  csv.header({"t", "psi_m"});
  for (std::size_t j = 0; j < tr.times.size(); ++j)
    csv.row({tr.times[j], tr.values[j]});
}

void write_plot_script(fs::path const& path, std::string const& body) {
  std::ofstream out(path);
  out << "#!/usr/bin/env python3\n"
      << "import numpy as np\n"
      << "import matplotlib\n"
      << "matplotlib.use('Agg')\n"
      << "import matplotlib.pyplot as plt\n\n"
      << body;
}

int run_bands(GlobalOpts const& g, RunConfig const& cfg) {
  auto f = cfg.make_potential();
  auto table = band_structure(f, cfg.n_trunc, zone_grid(cfg.a, cfg.q_points),
                              g.threads);
  write_bands_csv(out_path(g, "bands.csv"), table);
  double max_im = 0.0;
  for (auto const& p : table) max_im = std::max(max_im, std::abs(p.energy.imag()));
  std::printf("bands: %d q-points, %d bands, max |Im E| = %.3e -> bands.csv\n",
              cfg.q_points, 2 * cfg.n_trunc + 1, max_im);
  return 0;
}

void write_defects_csv(fs::path const& path, SingularityReport const& rep) {
  CsvWriter csv(path);
  csv.header({"lambda", "q", "E_re", "gap", "kappa_min", "classification"});
  for (auto const& p : rep.points)
    csv.row_with_label({rep.lambda, p.q, p.energy, p.gap, p.kappa_min},
                       to_string(p.cls));
}

int run_singularities(GlobalOpts const& g, RunConfig const& cfg) {
  auto f = cfg.make_potential();
  auto rep = scan_singularities(f, cfg.lambda, cfg.n_trunc);
  write_defects_csv(out_path(g, "defects.csv"), rep);
  std::printf("singularities: %zu defective energies at lambda=%g:",
              rep.energies.size(), cfg.lambda);
  for (auto const& e : rep.energies) std::printf(" %.6g", e.energy);
  std::printf(" -> defects.csv\n");
  return 0;
}

int run_lambda_scan(GlobalOpts const& g, RunConfig const& cfg, double lo,
                    double hi) {
  auto f = cfg.make_potential();
  double lc = find_lambda_c(f, cfg.n_trunc, lo, hi, cfg.tol_lambda, g.threads);
  std::printf("lambda-scan: lambda_c = %.6f (bracket [%g, %g], tol %g)\n", lc,
              lo, hi, cfg.tol_lambda);
  return 0;
}

int run_resolvent(GlobalOpts const& g, RunConfig const& cfg, int m0, int n0,
                  double energy, double eta0, int levels) {
  auto f = cfg.make_potential();
  CsvWriter csv(out_path(g, "resolvent.csv"));
  csv.header({"eta", "re_G", "im_G", "abs_G"});
  double prev = 0.0;
  for (int j = 0; j < levels; ++j) {
    double eta = eta0 / std::pow(4.0, j);
    auto p = projected_resolvent(f, cfg.lambda, cfg.n_trunc, m0, n0, energy,
                                 eta, cfg.n_quad, g.threads);
    double mag = std::abs(p.value);
    csv.row({eta, p.value.real(), p.value.imag(), mag});
    if (j)
      std::printf("resolvent-probe: eta=%.3e |G|=%.6g growth=%.3f\n", eta, mag,
                  mag / prev);
    else
      std::printf("resolvent-probe: eta=%.3e |G|=%.6g\n", eta, mag);
    if (p.n_perturbed)
      std::printf("resolvent-probe: %ld quadrature nodes perturbed\n",
                  p.n_perturbed);
    prev = mag;
  }
  std::printf("resolvent-probe: E=%.6g lambda=%g -> resolvent.csv\n", energy,
              cfg.lambda);
  return 0;
}

int run_evolve(GlobalOpts const& g, RunConfig const& cfg, double k) {
  auto f = cfg.make_potential();
  auto tr = evolve_orders(f, cfg.lambda, cfg.n_trunc, k, cfg.t_end,
                          cfg.n_records);
  write_trace_csv(out_path(g, "trace.csv"), tr);
  if (tr.boundary_warning)
    std::fprintf(stderr,
                 "evolve-orders: warning: cascade reached the truncation edge\n");
  int l_fed = tr.l0 + 1;
  if (std::abs(l_fed) <= tr.n_trunc) {
    auto fit = detect_secular(tr, l_fed);
    std::printf(
        "evolve-orders: k=%g (q=%g, l0=%d): order %d %s, slope=%.4g, r2=%.4f "
        "-> trace.csv\n",
        k, tr.q, tr.l0, l_fed, fit.secular ? "secular" : "bounded", fit.slope,
        fit.r2);
  } else {
    std::printf("evolve-orders: k=%g (q=%g, l0=%d) -> trace.csv\n", k, tr.q,
                tr.l0);
  }
  return 0;
}

struct PacketRun {
  WaveField field;
  PeakTrace peaks;
  PeakTrace order1;
};

// Propagates to t_end, dumping field snapshots at the requested times.
PacketRun run_packet_core(GlobalOpts const& g, RunConfig const& cfg,
                          double lambda, double w,
                          std::vector<double> const& snapshot_times,
                          std::string const& snapshot_prefix) {
  auto f = cfg.make_potential();
  PacketRun run;
  run.field = init_gaussian(w, cfg.grid_l, cfg.grid_m, cfg.a);
  PropagateOptions opts;
  opts.record_every = cfg.record_every;
  opts.order_trace = 1;
  opts.period_a = cfg.a;

  std::vector<double> stops = snapshot_times;
  if (stops.empty() || stops.back() < cfg.t_end) stops.push_back(cfg.t_end);
  double t_cur = 0.0;
  bool first = true;
  for (double t_next : stops) {
    int steps = (int)std::lround((t_next - t_cur) / cfg.dt);
    if (steps < 1) continue;
    auto res = propagate(std::move(run.field), f, lambda, cfg.dt, steps, opts);
    run.field = std::move(res.field);
    std::size_t skip = first ? 0 : 1; // segment start repeats the last record
    for (std::size_t j = skip; j < res.peaks.times.size(); ++j) {
      run.peaks.times.push_back(res.peaks.times[j]);
      run.peaks.values.push_back(res.peaks.values[j]);
    }
    for (std::size_t j = skip; j < res.order_peaks.times.size(); ++j) {
      run.order1.times.push_back(res.order_peaks.times[j]);
      run.order1.values.push_back(res.order_peaks.values[j]);
    }
    first = false;
    t_cur = run.field.time;
    if (!snapshot_prefix.empty() &&
        std::find(snapshot_times.begin(), snapshot_times.end(), t_next) !=
            snapshot_times.end()) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_t%g.csv", snapshot_prefix.c_str(),
                    t_next);
      write_field_csv(out_path(g, name), run.field, lambda, cfg.v0, w);
    }
  }
  return run;
}

int run_packet(GlobalOpts const& g, RunConfig const& cfg) {
  auto run = run_packet_core(g, cfg, cfg.lambda, cfg.w, {}, "");
  write_field_csv(out_path(g, "field.csv"), run.field, cfg.lambda, cfg.v0,
                  cfg.w);
  write_peaks_csv(out_path(g, "peaks.csv"), run.peaks);
  write_peaks_csv(out_path(g, "order1_peaks.csv"), run.order1);
  SpectrumProfile spec{-M_PI / cfg.a, cfg.w};
  double plateau =
      cfg.v0 * std::abs(asymptotic_psi1(spec, cfg.t_end, 0.0, cfg.a));
  std::printf(
      "packet: lambda=%g w=%g t_end=%g: psi_m(t_end)=%.4f, order-1 "
      "peak=%.4f (asymptotic plateau %.4f) -> field.csv, peaks.csv\n",
      cfg.lambda, cfg.w, cfg.t_end, run.peaks.values.back(),
      run.order1.values.back(), plateau);
  return 0;
}

int run_figure(GlobalOpts const& g, RunConfig cfg, std::string const& which) {
  if (which == "fig1b") {
    cfg.lambda = 1.0;
    run_bands(g, cfg);
    write_plot_script(out_path(g, "fig1b_plot.py"),
        "d = np.genfromtxt('bands.csv', delimiter=',', names=True)\n"
        "plt.figure(figsize=(5, 4))\n"
        "plt.plot(d['q'], d['re_E'], 'k.', ms=2)\n"
        "sing = d['kappa'] < 1e-3\n"
        "plt.plot(d['q'][sing], d['re_E'][sing], 'o', mfc='none', mec='r', ms=9)\n"
        "plt.xlabel('q'); plt.ylabel('E')\n"
        "plt.ylim(0, 110)\n"
        "plt.savefig('fig1b.png', dpi=160)\n");
    std::printf("figure fig1b: bands.csv + fig1b_plot.py\n");
    return 0;
  }
  if (which == "fig2" || which == "fig4" || which == "fig5") {
    double lambda = which == "fig2" ? 1.0 : (which == "fig4" ? 0.9 : 1.1);
    cfg.lambda = lambda;
    std::vector<double> snaps = {10.0, 20.0, 30.0, 40.0};
    auto run = run_packet_core(g, cfg, lambda, cfg.w, snaps, which + "_field");
    write_peaks_csv(out_path(g, which + "_peaks.csv"), run.peaks);
    std::string body =
        "snaps = [10, 20, 30, 40]\n"
        "fig, ax = plt.subplots(2, 1, figsize=(6, 7))\n"
        "for t in snaps:\n"
        "    d = np.genfromtxt('" + which + "_field_t%g.csv' % t, delimiter=',',\n"
        "                      names=True, skip_header=1)\n"
        "    ax[0].plot(d['x'], d['abs_psi'], label='t=%g' % t)\n"
        "ax[0].set_xlim(-500, 500); ax[0].legend()\n"
        "ax[0].set_xlabel('x'); ax[0].set_ylabel('|psi|')\n"
        "p = np.genfromtxt('" + which + "_peaks.csv', delimiter=',', names=True)\n"
        "ax[1].plot(p['t'], p['psi_m'])\n"
        "ax[1].set_xlabel('t'); ax[1].set_ylabel('psi_m')\n"
        "plt.tight_layout(); plt.savefig('" + which + ".png', dpi=160)\n";
    write_plot_script(out_path(g, which + "_plot.py"), body);
    std::printf("figure %s: lambda=%g field/peak CSVs + %s_plot.py\n",
                which.c_str(), lambda, which.c_str());
    return 0;
  }
  if (which == "fig3") {
    std::vector<double> widths = {40.0, 80.0, 150.0, 300.0};
    std::vector<PeakTrace> traces(widths.size());
    parallel_for(widths.size(), g.threads, [&](std::size_t i) {
      RunConfig c = cfg;
      // wider packets need a wider box (w <= L/16); preserve dx
      while (c.grid_l < 16.0 * widths[i]) {
        c.grid_l *= 2.0;
        c.grid_m *= 2;
      }
      traces[i] = run_packet_core(g, c, 1.0, widths[i], {}, "").peaks;
    });
    for (std::size_t i = 0; i < widths.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof name, "fig3_peaks_w%g.csv", widths[i]);
      write_peaks_csv(out_path(g, name), traces[i]);
    }
    write_plot_script(out_path(g, "fig3_plot.py"),
        "plt.figure(figsize=(6, 4))\n"
        "for w in [40, 80, 150, 300]:\n"
        "    d = np.genfromtxt('fig3_peaks_w%g.csv' % w, delimiter=',', names=True)\n"
        "    plt.plot(d['t'], d['psi_m'], label='w=%g' % w)\n"
        "plt.xlabel('t'); plt.ylabel('psi_m'); plt.legend()\n"
        "plt.savefig('fig3.png', dpi=160)\n");
    std::printf("figure fig3: peak CSVs for w in {40, 80, 150, 300} + fig3_plot.py\n");
    return 0;
  }
  throw ConfigError("figure: unknown figure id '" + which + "'");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex-crystal band structures, spectral singularities and "
               "Bragg scattering"};
  app.require_subcommand(0, 1);
  app.fallthrough(); // let global options appear after the subcommand too

  GlobalOpts g;
  RunConfig cfg;
  app.add_option("--out-dir", g.out_dir, "Output directory for CSV artifacts");
  app.add_option("--threads", g.threads, "Worker threads for parallel scans");
  app.add_option("--config", g.config_file, "key=value config file");
  app.add_flag("--show-config", g.show_config, "Print the effective config and exit");

  // flag overrides; applied on top of defaults and the config file
  std::optional<double> o_v0, o_a, o_lambda, o_dt, o_tend, o_w, o_l;
  std::optional<int> o_n, o_qpts, o_m, o_nrec;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--v0", o_v0, "Potential amplitude V0");
    s->add_option("--a", o_a, "Lattice period a");
    s->add_option("--lambda", o_lambda, "Anti-Hermitian strength lambda");
    s->add_option("--n", o_n, "Plane-wave truncation N");
  };

  auto* sc_bands = app.add_subcommand("bands", "Band structure over the zone");
  add_common(sc_bands);
  sc_bands->add_option("--q-points", o_qpts, "Number of q grid points");

  auto* sc_sing = app.add_subcommand("singularities",
                                     "Classify zone-center/edge degeneracies");
  add_common(sc_sing);

  double lo = 0.5, hi = 1.5;
  auto* sc_scan = app.add_subcommand("lambda-scan",
                                     "Bisect the symmetry-breaking threshold");
  add_common(sc_scan);
  sc_scan->add_option("--lo", lo, "Lower bracket");
  sc_scan->add_option("--hi", hi, "Upper bracket");

  int m0 = 1, n0 = 0, levels = 4;
  double probe_e = M_PI * M_PI, eta0 = 1e-2;
  auto* sc_res = app.add_subcommand("resolvent-probe",
                                    "Projected resolvent vs eta");
  add_common(sc_res);
  sc_res->add_option("--e", probe_e, "Probe energy E");
  sc_res->add_option("--eta", eta0, "Largest eta; subsequent levels divide by 4");
  sc_res->add_option("--levels", levels, "Number of eta levels");
  sc_res->add_option("--m0", m0, "Row component of R_{m0,n0}");
  sc_res->add_option("--n0", n0, "Column component of R_{m0,n0}");

  double k_in = -M_PI;
  auto* sc_evolve = app.add_subcommand("evolve-orders",
                                       "Diffracted-order dynamics for a plane wave");
  add_common(sc_evolve);
  sc_evolve->add_option("--k", k_in, "Incident wave number");
  sc_evolve->add_option("--t-end", o_tend, "Final time");
  sc_evolve->add_option("--records", o_nrec, "Number of records");

  auto* sc_packet = app.add_subcommand("packet", "Split-step wave packet run");
  add_common(sc_packet);
  sc_packet->add_option("--w", o_w, "Input packet width");
  sc_packet->add_option("--t-end", o_tend, "Final time");
  sc_packet->add_option("--dt", o_dt, "Time step");
  sc_packet->add_option("--grid-l", o_l, "Domain length L");
  sc_packet->add_option("--grid-m", o_m, "Grid points M (power of two)");

  std::string figure_id;
  auto* sc_fig = app.add_subcommand("figure", "Reproduce a figure pipeline");
  sc_fig->add_option("id", figure_id, "fig1b|fig2|fig3|fig4|fig5")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!g.config_file.empty()) cfg.load(g.config_file);
    if (o_v0) cfg.v0 = *o_v0;
    if (o_a) cfg.a = *o_a;
    if (o_lambda) cfg.lambda = *o_lambda;
    if (o_n) cfg.n_trunc = *o_n;
    if (o_qpts) cfg.q_points = *o_qpts;
    if (o_dt) cfg.dt = *o_dt;
    if (o_tend) cfg.t_end = *o_tend;
    if (o_nrec) cfg.n_records = *o_nrec;
    if (o_w) cfg.w = *o_w;
    if (o_l) cfg.grid_l = *o_l;
    if (o_m) cfg.grid_m = *o_m;
    cfg.validate();
    if (g.show_config) {
      std::fputs(cfg.show().c_str(), stdout);
      return 0;
    }
    if (sc_bands->parsed()) return run_bands(g, cfg);
    if (sc_sing->parsed()) return run_singularities(g, cfg);
    if (sc_scan->parsed()) return run_lambda_scan(g, cfg, lo, hi);
    if (sc_res->parsed())
      return run_resolvent(g, cfg, m0, n0, probe_e, eta0, levels);
    if (sc_evolve->parsed()) return run_evolve(g, cfg, k_in);
    if (sc_packet->parsed()) return run_packet(g, cfg);
    if (sc_fig->parsed()) return run_figure(g, cfg, figure_id);
    std::fputs(app.help().c_str(), stdout);
    return 0;
  } catch (ConfigError const& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (std::invalid_argument const& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (std::exception const& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
