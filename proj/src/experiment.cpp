#include "ncndn/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ncndn/random.hpp"

namespace ncndn::experiment {
namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::ios_base::failure("cannot write " + path.string());
  return os;
}

void close_out(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw std::ios_base::failure("error writing " + path.string());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::ios_base::failure("cannot create output directory " + dir.string());
  }
}

template <typename Writer>
fs::path emit(const fs::path& dir, const std::string& name, Writer&& write) {
  const auto path = dir / name;
  auto os = open_out(path);
  write(os);
  close_out(os, path);
  return path;
}

config::ExperimentConfig scaled(config::ExperimentConfig cfg, const RunOptions& opt) {
  if (!(opt.bandwidth_scale > 0)) throw config::ConfigInvalid("--bandwidth-scale must be > 0");
  for (auto& b : cfg.bandwidth_sweep) b *= opt.bandwidth_scale;
  cfg.trace_bandwidth *= opt.bandwidth_scale;
  cfg.low_bandwidth *= opt.bandwidth_scale;
  cfg.high_bandwidth *= opt.bandwidth_scale;
  cfg.seed = opt.seed;
  if (opt.exact_bloom) cfg.sim.exact_bloom = true;
  return cfg;
}

double trace_point(const config::ExperimentConfig& cfg, double scale) {
  return cfg.trace_bandwidth > 0 ? cfg.trace_bandwidth : cfg.nominal_bandwidth * scale;
}

}  // namespace

std::vector<Check> validate(const config::ExperimentConfig& cfg) {
  std::vector<Check> out;
  NetworkGraph g;
  try {
    g = config::parse_topology(cfg.topology_path);
    out.push_back({"topology parses", true, cfg.topology_path.string()});
  } catch (const std::exception& e) {
    out.push_back({"topology parses", false, e.what()});
    return out;
  }
  try {
    g.validate();
    out.push_back({"single server, acyclic, sane links", true, ""});
  } catch (const std::exception& e) {
    out.push_back({"single server, acyclic, sane links", false, e.what()});
    return out;
  }
  const auto clients = g.clients();
  out.push_back({"at least one client", !clients.empty(),
                 std::to_string(clients.size()) + " clients"});
  for (int c : clients) {
    const auto usable = optimizer::usable_links(g, c);
    bool reach = false;
    for (int e : g.out_links(c)) reach = reach || usable[e];
    out.push_back({"client " + std::to_string(c) + " reaches the server", reach, ""});
  }
  const auto violations = optimizer::validate_costs(cfg.profile, cfg.costs);
  if (violations.empty()) {
    out.push_back({"cost vector admissible", true, ""});
  }
  for (const auto& v : violations) {
    out.push_back({"cost c_" + std::to_string(v.layer) + " " + v.rule, false, v.message});
  }
  out.push_back({"bandwidth sweep nonempty", !cfg.bandwidth_sweep.empty(), ""});
  return out;
}

NetworkGraph topology_at(const config::ExperimentConfig& cfg, double bandwidth) {
  auto g = config::parse_topology(cfg.topology_path);
  g.validate();
  g.scale_bandwidth(bandwidth / cfg.nominal_bandwidth);
  return g;
}

optimizer::RateAllocation allocate(const config::ExperimentConfig& cfg, const NetworkGraph& g) {
  return optimizer::optimize(g, cfg.profile, cfg.costs, cfg.optimizer);
}

void write_allocation(std::ostream& os, const NetworkGraph& g,
                      const optimizer::RateAllocation& a, const prlnc::VideoProfile& profile) {
  os << "kind,link_from,link_to,class,user,rate_pps\n";
  const int U = static_cast<int>(a.clients.size());
  const int L = profile.layers();
  const double T = profile.gen_duration;
  for (int u = 0; u < U; ++u) {
    for (int l = 0; l < L; ++l) {
      for (int e = 0; e < g.link_count(); ++e) {
        const double r = a.r_hat[u][l][e];
        if (r > 1e-9) {
          os << "flow," << g.link(e).from << ',' << g.link(e).to << ',' << l << ','
             << a.clients[u] << ',' << fmt(r) << '\n';
        }
      }
    }
  }
  for (int u = 0; u < U; ++u) {
    for (int l = 0; l < L; ++l) {
      for (int e = 0; e < g.link_count(); ++e) {
        if (const int n = a.plan.r[u][l][e]; n > 0) {
          os << "plan," << g.link(e).from << ',' << g.link(e).to << ',' << l << ','
             << a.clients[u] << ',' << fmt(n / T) << '\n';
        }
      }
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int e = 0; e < g.link_count(); ++e) {
      if (const int n = a.plan.z[l][e]; n > 0) {
        os << "actual," << g.link(e).from << ',' << g.link(e).to << ',' << l << ",-1,"
           << fmt(n / T) << '\n';
      }
    }
  }
  for (int u = 0; u < U; ++u) {
    for (int l = 0; l < L; ++l) {
      os << "interests,-1,-1," << l << ',' << a.clients[u] << ','
         << fmt(a.plan.counts[u][l] / T) << '\n';
    }
  }
}

void write_recovered(std::ostream& os, const NetworkGraph& g,
                     const optimizer::RateAllocation& a, const prlnc::VideoProfile& profile) {
  os << "client,class,recovered_pps,restored_pps,interests_per_gen,level,exp_psnr\n";
  for (std::size_t u = 0; u < a.clients.size(); ++u) {
    const int c = a.clients[u];
    const int level = a.plan.level[u];
    for (int l = 0; l < profile.layers(); ++l) {
      os << c << ',' << l << ',' << fmt(optimizer::source_rate(g, c, a.r_raw[u][l])) << ','
         << fmt(optimizer::source_rate(g, c, a.r_hat[u][l])) << ',' << a.plan.counts[u][l] << ','
         << level << ',' << fmt(profile.quality_of(level), 2) << '\n';
    }
  }
}

void write_convergence(std::ostream& os, const optimizer::RateAllocation& a) {
  os << "iter,dual,primal,client,class,rate_pps\n";
  for (const auto& row : a.trace) {
    const auto head = std::to_string(row.iter) + ',' + fmt(row.dual, 9) + ',' + fmt(row.primal, 9);
    for (std::size_t u = 0; u < row.source.size(); ++u) {
      for (std::size_t l = 0; l < row.source[u].size(); ++l) {
        os << head << ',' << a.clients[u] << ',' << l << ',' << fmt(row.source[u][l]) << '\n';
      }
    }
  }
}

std::uint64_t run_seed(std::uint64_t base, int run) {
  return Rng::derive(base, static_cast<std::uint64_t>(run));
}

std::vector<SweepPoint> sweep(const config::ExperimentConfig& cfg, const SweepOptions& opt) {
  std::vector<SweepPoint> out;
  for (double bw : opt.bandwidths) {
    const auto g = topology_at(cfg, bw);
    const auto alloc = allocate(cfg, g);
    const auto ub = sim::upper_bound_psnr(g, cfg.profile, alloc.clients);
    const int U = static_cast<int>(alloc.clients.size());

    SweepPoint pt;
    pt.bandwidth = bw;
    pt.runs = opt.runs;
    pt.clients.resize(U);
    for (int u = 0; u < U; ++u) {
      auto& c = pt.clients[u];
      c.client = alloc.clients[u];
      c.ub = ub[u];
      c.exp = cfg.profile.quality_of(alloc.plan.level[u]);
      c.per_gen.assign(cfg.sim.generations, 0.0);
    }
    for (const auto& l : g.links()) pt.links.push_back({l.from, l.to, l.bandwidth});

    for (int k = 0; k < opt.runs; ++k) {
      const bool traced = k == 0 && opt.trace && bw == opt.trace_bandwidth;
      const auto rep = sim::run(g, cfg.profile, alloc.clients, alloc.plan, cfg.sim,
                                run_seed(opt.seed, k), traced ? opt.trace : nullptr);
      for (int u = 0; u < U; ++u) {
        auto& c = pt.clients[u];
        const auto& r = rep.clients[u];
        c.sim += r.mean_psnr / opt.runs;
        for (std::size_t j = 0; j < r.psnr.size(); ++j) c.per_gen[j] += r.psnr[j] / opt.runs;
        c.non_innovative += r.non_innovative;
        c.excess += r.excess_deliveries;
        c.identical += r.identical_deliveries;
      }
      for (std::size_t e = 0; e < rep.links.size(); ++e) {
        auto& l = pt.links[e];
        const auto& r = rep.links[e];
        l.interest_bps += r.interest_bits / rep.duration / opt.runs;
        l.data_bps += r.data_bits / rep.duration / opt.runs;
        l.utilization += r.utilization / opt.runs;
        l.peak_window_bits = std::max(l.peak_window_bits, r.peak_window_bits);
      }
      if (opt.on_run) opt.on_run(bw, k, rep);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

void write_psnr_vs_bandwidth(std::ostream& os, const std::vector<SweepPoint>& pts) {
  os << "client,bandwidth,UB,EXP,SIM\n";
  if (pts.empty()) return;
  for (std::size_t u = 0; u < pts.front().clients.size(); ++u) {
    for (const auto& p : pts) {
      const auto& c = p.clients[u];
      os << c.client << ',' << fmt(p.bandwidth, 2) << ',' << fmt(c.ub, 4) << ','
         << fmt(c.exp, 4) << ',' << fmt(c.sim, 4) << '\n';
    }
  }
}

void write_psnr_vs_time(std::ostream& os, const std::vector<SweepPoint>& pts) {
  os << "client,bandwidth,generation,psnr\n";
  for (const auto& p : pts) {
    for (const auto& c : p.clients) {
      for (std::size_t j = 0; j < c.per_gen.size(); ++j) {
        os << c.client << ',' << fmt(p.bandwidth, 2) << ',' << j << ',' << fmt(c.per_gen[j], 4)
           << '\n';
      }
    }
  }
}

void write_link_util(std::ostream& os, const std::vector<SweepPoint>& pts) {
  os << "bandwidth,from,to,capacity_bps,interest_bps,data_bps,utilization,peak_window_bits\n";
  for (const auto& p : pts) {
    for (const auto& l : p.links) {
      os << fmt(p.bandwidth, 2) << ',' << l.from << ',' << l.to << ',' << fmt(l.capacity, 2)
         << ',' << fmt(l.interest_bps, 2) << ',' << fmt(l.data_bps, 2) << ','
         << fmt(l.utilization) << ',' << fmt(l.peak_window_bits, 0) << '\n';
    }
  }
}

void write_delivery_stats(std::ostream& os, const std::vector<SweepPoint>& pts) {
  os << "bandwidth,client,runs,non_innovative,excess,identical\n";
  for (const auto& p : pts) {
    for (const auto& c : p.clients) {
      os << fmt(p.bandwidth, 2) << ',' << c.client << ',' << p.runs << ',' << c.non_innovative
         << ',' << c.excess << ',' << c.identical << '\n';
    }
  }
}

void write_gnuplot(std::ostream& os, const std::vector<SweepPoint>& pts) {
  os << "# gnuplot plots.gp  (reads the CSVs in this directory)\n"
        "set datafile separator ','\n"
        "set terminal pngcairo size 900,600\n"
        "set key bottom right\n";
  if (pts.empty()) return;
  for (const auto& c : pts.front().clients) {
    const auto id = std::to_string(c.client);
    os << "\nset output 'psnr_vs_bandwidth_" << id << ".png'\n"
       << "set title 'client " << id << "'\n"
       << "set xlabel 'link bandwidth (bps)'\nset ylabel 'PSNR (dB)'\n"
       << "plot for [col=3:5] 'psnr_vs_bandwidth.csv' using "
       << "(strcol(1) eq '" << id << "' ? $2 : 1/0):col with linespoints title columnhead(col)\n";
  }
  os << "\nset output 'psnr_vs_time.png'\nset title 'PSNR per generation'\n"
        "set xlabel 'generation'\nset ylabel 'PSNR (dB)'\n"
        "plot 'psnr_vs_time.csv' using 3:4 with points title 'all clients'\n";
  for (const char* which : {"low", "high"}) {
    os << "\nset output 'convergence_" << which << ".png'\n"
       << "set title 'recovered rates, " << which << " bandwidth'\n"
       << "set xlabel 'iteration'\nset ylabel 'packets/s'\n"
       << "plot for [k=0:2] 'convergence_" << which
       << ".csv' using ($5 == k ? $1 : 1/0):6 with dots title sprintf('class %d', k)\n";
  }
}

std::vector<fs::path> cmd_optimize(const config::ExperimentConfig& base, const RunOptions& opt) {
  const auto cfg = scaled(base, opt);
  prepare_dir(opt.out);
  const auto g = topology_at(cfg, cfg.nominal_bandwidth * opt.bandwidth_scale);
  const auto a = allocate(cfg, g);
  std::vector<fs::path> files;
  files.push_back(emit(opt.out, "allocation.csv",
                       [&](std::ostream& os) { write_allocation(os, g, a, cfg.profile); }));
  files.push_back(emit(opt.out, "recovered_rates.csv",
                       [&](std::ostream& os) { write_recovered(os, g, a, cfg.profile); }));
  files.push_back(
      emit(opt.out, "convergence.csv", [&](std::ostream& os) { write_convergence(os, a); }));
  return files;
}

namespace {

// Sweep point whose first run is traced: the configured one, or the nominal
// bandwidth, snapped to the nearest point actually simulated.
double traced_point(const config::ExperimentConfig& cfg, double scale) {
  const double want = trace_point(cfg, scale);
  double best = cfg.bandwidth_sweep.front();
  for (double b : cfg.bandwidth_sweep) {
    if (std::abs(b - want) < std::abs(best - want)) best = b;
  }
  return best;
}

std::vector<fs::path> simulate_into(const config::ExperimentConfig& cfg, const RunOptions& opt) {
  const auto trace_path = opt.out / "event_trace.log";
  auto trace = open_out(trace_path);
  SweepOptions so;
  so.seed = cfg.seed;
  so.runs = cfg.runs;
  so.bandwidths = cfg.bandwidth_sweep;
  so.trace_bandwidth = traced_point(cfg, opt.bandwidth_scale);
  so.trace = &trace;
  const auto pts = sweep(cfg, so);
  close_out(trace, trace_path);

  std::vector<fs::path> files{trace_path};
  files.push_back(emit(opt.out, "psnr_vs_bandwidth.csv",
                       [&](std::ostream& os) { write_psnr_vs_bandwidth(os, pts); }));
  files.push_back(
      emit(opt.out, "psnr_vs_time.csv", [&](std::ostream& os) { write_psnr_vs_time(os, pts); }));
  files.push_back(
      emit(opt.out, "link_util.csv", [&](std::ostream& os) { write_link_util(os, pts); }));
  files.push_back(emit(opt.out, "delivery_stats.csv",
                       [&](std::ostream& os) { write_delivery_stats(os, pts); }));
  files.push_back(emit(opt.out, "plots.gp", [&](std::ostream& os) { write_gnuplot(os, pts); }));
  return files;
}

}  // namespace

std::vector<fs::path> cmd_simulate(const config::ExperimentConfig& base, const RunOptions& opt) {
  const auto cfg = scaled(base, opt);
  prepare_dir(opt.out);
  return simulate_into(cfg, opt);
}

std::vector<fs::path> cmd_reproduce(const config::ExperimentConfig& base, const RunOptions& opt) {
  const auto cfg = scaled(base, opt);
  prepare_dir(opt.out);
  std::vector<fs::path> files;
  const std::pair<const char*, double> ends[] = {{"low", cfg.low_bandwidth},
                                                 {"high", cfg.high_bandwidth}};
  for (const auto& [which, bw] : ends) {
    if (!(bw > 0)) continue;
    const auto g = topology_at(cfg, bw);
    const auto a = allocate(cfg, g);
    files.push_back(emit(opt.out, std::string("convergence_") + which + ".csv",
                         [&](std::ostream& os) { write_convergence(os, a); }));
    files.push_back(emit(opt.out, std::string("recovered_rates_") + which + ".csv",
                         [&](std::ostream& os) { write_recovered(os, g, a, cfg.profile); }));
  }
  const auto g = topology_at(cfg, cfg.nominal_bandwidth * opt.bandwidth_scale);
  const auto a = allocate(cfg, g);
  files.push_back(emit(opt.out, "allocation.csv",
                       [&](std::ostream& os) { write_allocation(os, g, a, cfg.profile); }));
  files.push_back(emit(opt.out, "recovered_rates.csv",
                       [&](std::ostream& os) { write_recovered(os, g, a, cfg.profile); }));
  auto sim_files = simulate_into(cfg, opt);
  files.insert(files.end(), sim_files.begin(), sim_files.end());
  return files;
}

}  // namespace ncndn::experiment
