#include "ncndn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace ncndn::config {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Field {
  std::string text;
  int column;
};

std::vector<Field> split_fields(const std::string& line) {
  std::vector<Field> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto piece = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                      : comma - start);
    const auto lead = piece.find_first_not_of(" \t");
    out.push_back({trim(piece), static_cast<int>(start + (lead == std::string::npos ? 0 : lead)) + 1});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  if (s.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    is >> out;
    return is && is.peek() == std::char_traits<char>::eof();
  } else {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_number(trim(item), v)) {
      throw ConfigInvalid("bad number '" + trim(item) + "' in " + key);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::string source, int line, int column, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

NetworkGraph parse_topology_text(const std::string& text, const std::string& source) {
  NetworkGraph g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  struct PendingEdge {
    int line;
    std::vector<Field> f;
  };
  std::vector<PendingEdge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto f = split_fields(line);
    if (f[0].text == "node") {
      if (f.size() != 3) throw ParseError(source, lineno, 1, "node record needs id and role");
      int id;
      if (!parse_number(f[1].text, id)) {
        throw ParseError(source, lineno, f[1].column, "bad node id '" + f[1].text + "'");
      }
      if (id != g.node_count()) {
        throw ParseError(source, lineno, f[1].column,
                         "node ids must be dense and ascending; expected " +
                             std::to_string(g.node_count()));
      }
      Role role;
      if (f[2].text == "server") role = Role::kServer;
      else if (f[2].text == "intermediate") role = Role::kIntermediate;
      else if (f[2].text == "client") role = Role::kClient;
      else throw ParseError(source, lineno, f[2].column, "unknown role '" + f[2].text + "'");
      g.add_node(role);
    } else if (f[0].text == "edge") {
      if (f.size() != 5) {
        throw ParseError(source, lineno, 1, "edge record needs i, j, bandwidth, delay");
      }
      edges.push_back({lineno, std::move(f)});
    } else {
      throw ParseError(source, lineno, f[0].column, "unknown record '" + f[0].text + "'");
    }
  }
  for (const auto& [ln, f] : edges) {
    int i, j;
    double bw, delay;
    if (!parse_number(f[1].text, i) || i < 0 || i >= g.node_count()) {
      throw ParseError(source, ln, f[1].column, "unknown node '" + f[1].text + "'");
    }
    if (!parse_number(f[2].text, j) || j < 0 || j >= g.node_count()) {
      throw ParseError(source, ln, f[2].column, "unknown node '" + f[2].text + "'");
    }
    if (!parse_number(f[3].text, bw) || !std::isfinite(bw) || bw < 0) {
      throw ParseError(source, ln, f[3].column, "bandwidth must be a non-negative number");
    }
    if (!parse_number(f[4].text, delay) || !std::isfinite(delay) || delay < 0) {
      throw ParseError(source, ln, f[4].column, "delay must be a non-negative number");
    }
    try {
      g.add_link(i, j, bw, delay);
    } catch (const std::exception& e) {
      throw ParseError(source, ln, 1, e.what());
    }
  }
  g.server();  // MultiServerError
  g.topological_order();  // CycleError
  return g;
}

NetworkGraph parse_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read topology " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology_text(ss.str(), path.string());
}

std::string write_topology(const NetworkGraph& g) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  for (int i = 0; i < g.node_count(); ++i) {
    os << "node," << i << "," << role_name(g.role(i)) << "\n";
  }
  for (const auto& l : g.links()) {
    os << "edge," << l.from << "," << l.to << "," << l.bandwidth << "," << l.delay << "\n";
  }
  return os.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read config " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(path.string(), static_cast<int>(e.line()), 1, e.message());
  }

  ExperimentConfig c;
  c.source = path;
  const auto base = path.parent_path();
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(key)) return trim(*v);
    return std::nullopt;
  };
  auto number = [&](const std::string& key, auto& out) {
    if (auto v = get(key)) {
      if (!parse_number(*v, out)) throw ConfigInvalid("bad value for " + key + ": '" + *v + "'");
    }
  };

  auto& p = c.profile;
  p = prlnc::VideoProfile::foreman_cif();
  if (auto v = get("video.alpha")) {
    p.alpha.clear();
    for (double a : parse_list("video.alpha", *v)) {
      if (a != std::floor(a)) throw ConfigInvalid("video.alpha entries must be integers");
      p.alpha.push_back(static_cast<int>(a));
    }
  }
  if (auto v = get("video.rates")) p.rates = parse_list("video.rates", *v);
  if (auto v = get("video.quality")) p.quality = parse_list("video.quality", *v);
  number("video.gen_duration", p.gen_duration);
  number("video.payload_size", p.payload_size);
  number("video.interest_size", p.interest_size);
  number("video.codec_payload", c.sim.codec_payload);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigInvalid(std::string("video: ") + e.what());
  }

  c.costs = {0.01, 0.015, 0.017};
  if (auto v = get("costs.c")) c.costs = parse_list("costs.c", *v);

  auto& o = c.optimizer;
  number("optimizer.a", o.step.a);
  number("optimizer.b", o.step.b);
  number("optimizer.c", o.step.c);
  number("optimizer.max_iter", o.max_iter);
  number("optimizer.tol", o.tol);
  number("optimizer.mu0", o.mu0);
  number("optimizer.warmup", o.warmup);
  if (!(o.step.a > 0) || o.step.b < 0 || !(o.step.c > 0) || o.max_iter < 1 || o.mu0 < 0 ||
      o.warmup < 0) {
    throw ConfigInvalid(
        "optimizer needs a > 0, b >= 0, c > 0, max_iter >= 1, mu0 >= 0, warmup >= 0");
  }

  auto& s = c.sim;
  number("sim.generations", s.generations);
  number("sim.playback_delay", s.playback_delay);
  number("sim.window", s.window);
  number("sim.max_jitter", s.max_jitter);
  number("sim.runs", c.runs);
  number("sim.seed", c.seed);
  number("sim.bloom_bits", s.bloom_bits);
  number("sim.bloom_hashes", s.bloom_hashes);
  number("sim.bloom_seed1", s.bloom_seed1);
  number("sim.bloom_seed2", s.bloom_seed2);
  if (auto v = get("sim.exact_bloom")) s.exact_bloom = *v == "true" || *v == "1";
  if (auto v = get("sim.link_sharing")) {
    if (*v == "shared") s.sharing = LinkSharing::kShared;
    else if (*v == "split") s.sharing = LinkSharing::kStaticSplit;
    else throw ConfigInvalid("sim.link_sharing must be 'shared' or 'split'");
  }
  if (s.generations < 1 || s.window < 1 || c.runs < 1 || s.playback_delay < 0 ||
      s.max_jitter < 0 || s.bloom_bits < 8 || s.bloom_hashes < 1 || s.codec_payload < 1) {
    throw ConfigInvalid("sim parameters out of range");
  }

  if (auto v = get("topology.file")) {
    c.topology_path = std::filesystem::path(*v).is_absolute() ? std::filesystem::path(*v)
                                                              : base / *v;
  } else {
    throw ConfigInvalid("topology.file is required");
  }
  number("topology.nominal_bandwidth", c.nominal_bandwidth);
  if (!(c.nominal_bandwidth > 0)) throw ConfigInvalid("topology.nominal_bandwidth must be > 0");
  if (auto v = get("topology.sweep")) c.bandwidth_sweep = parse_list("topology.sweep", *v);
  if (c.bandwidth_sweep.empty()) c.bandwidth_sweep = {c.nominal_bandwidth};
  for (double b : c.bandwidth_sweep) {
    if (!(b >= 0)) throw ConfigInvalid("topology.sweep entries must be >= 0");
  }
  number("topology.trace_bandwidth", c.trace_bandwidth);
  number("topology.focus_client", c.focus_client);
  number("topology.low_bandwidth", c.low_bandwidth);
  number("topology.high_bandwidth", c.high_bandwidth);
  return c;
}

}  // namespace ncndn::config
