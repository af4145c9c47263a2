#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ncndn/config.hpp"
#include "ncndn/experiment.hpp"
#include "ncndn/galois.hpp"
#include "ncndn/optimizer.hpp"
#include "ncndn/prlnc.hpp"
#include "ncndn/protocol.hpp"
#include "ncndn/sim.hpp"

namespace py = pybind11;
using namespace ncndn;

namespace {

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Network-coded NDN video streaming core";

  py::register_exception<config::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<config::ConfigInvalid>(m, "ConfigInvalid", PyExc_ValueError);
  py::register_exception<optimizer::Infeasible>(m, "Infeasible", PyExc_RuntimeError);
  py::register_exception<CycleError>(m, "CycleError", PyExc_ValueError);
  py::register_exception<MultiServerError>(m, "MultiServerError", PyExc_ValueError);

  m.def("gf_mul", &galois::mul, py::arg("a"), py::arg("b"));
  m.def("gf_div", &galois::div, py::arg("a"), py::arg("b"));
  m.def("gf_inv", &galois::inv, py::arg("a"));

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next", &Rng::next)
      .def("uniform", &Rng::uniform)
      .def_static("derive", &Rng::derive, py::arg("base"), py::arg("stream"));

  py::class_<prlnc::VideoProfile>(m, "VideoProfile")
      .def(py::init<>())
      .def_static("foreman_cif", &prlnc::VideoProfile::foreman_cif)
      .def_readwrite("alpha", &prlnc::VideoProfile::alpha)
      .def_readwrite("rates", &prlnc::VideoProfile::rates)
      .def_readwrite("quality", &prlnc::VideoProfile::quality)
      .def_readwrite("gen_duration", &prlnc::VideoProfile::gen_duration)
      .def_readwrite("payload_size", &prlnc::VideoProfile::payload_size)
      .def_readwrite("interest_size", &prlnc::VideoProfile::interest_size)
      .def("layers", &prlnc::VideoProfile::layers)
      .def("beta", &prlnc::VideoProfile::beta, py::arg("layer"))
      .def("cumulative_rate", &prlnc::VideoProfile::cumulative_rate, py::arg("layer"))
      .def("quality_of", &prlnc::VideoProfile::quality_of, py::arg("layer"))
      .def("exchange_bits", &prlnc::VideoProfile::exchange_bits)
      .def("validate", &prlnc::VideoProfile::validate);

  py::class_<prlnc::Generation>(m, "Generation")
      .def_readonly("index", &prlnc::Generation::index)
      .def_readonly("deadline", &prlnc::Generation::deadline)
      .def_property_readonly("source", [](const prlnc::Generation& g) {
        py::list out;
        for (const auto& b : g.source) out.append(as_bytes(b));
        return out;
      });
  m.def("make_generation", &prlnc::make_generation, py::arg("profile"), py::arg("index"),
        py::arg("payload_bytes"), py::arg("playback_delay") = 1.0, py::arg("content_seed") = 0);

  py::class_<prlnc::CodedPacket>(m, "CodedPacket")
      .def_readonly("cls", &prlnc::CodedPacket::cls)
      .def_readonly("generation", &prlnc::CodedPacket::generation)
      .def_property_readonly("coefficients",
                             [](const prlnc::CodedPacket& p) { return as_bytes(p.coefficients); })
      .def_property_readonly("payload", [](const prlnc::CodedPacket& p) { return as_bytes(p.payload); })
      .def("serialize", [](const prlnc::CodedPacket& p) { return as_bytes(prlnc::serialize(p)); })
      .def_static("parse", [](const py::bytes& wire) { return prlnc::parse_packet(from_bytes(wire)); })
      .def("__eq__", [](const prlnc::CodedPacket& a, const prlnc::CodedPacket& b) { return a == b; });

  m.def("encode", &prlnc::encode, py::arg("profile"), py::arg("generation"), py::arg("cls"),
        py::arg("rng"));
  m.def(
      "recode",
      [](const prlnc::VideoProfile& p, const std::vector<prlnc::CodedPacket>& in, int cls,
         std::uint32_t generation, Rng& rng) { return prlnc::recode(p, in, cls, generation, rng); },
      py::arg("profile"), py::arg("packets"), py::arg("cls"), py::arg("generation"), py::arg("rng"));

  py::class_<prlnc::DecoderState>(m, "Decoder")
      .def(py::init<const prlnc::VideoProfile&, std::uint32_t>(), py::arg("profile"),
           py::arg("generation"))
      .def("absorb", &prlnc::DecoderState::absorb, py::arg("packet"))
      .def("innovative", &prlnc::DecoderState::innovative, py::arg("packet"))
      .def("rank", &prlnc::DecoderState::rank)
      .def("prefix_rank", &prlnc::DecoderState::prefix_rank, py::arg("columns"))
      .def("decodable_layer", &prlnc::DecoderState::decodable_layer)
      .def("decoded_sources", [](const prlnc::DecoderState& d, int layer) {
        py::list out;
        for (const auto& b : d.decoded_sources(layer)) out.append(as_bytes(b));
        return out;
      });

  py::enum_<Role>(m, "Role")
      .value("server", Role::kServer)
      .value("intermediate", Role::kIntermediate)
      .value("client", Role::kClient);

  py::class_<Link>(m, "Link")
      .def_readonly("source", &Link::from)
      .def_readonly("target", &Link::to)
      .def_readonly("bandwidth", &Link::bandwidth)
      .def_readonly("delay", &Link::delay);

  py::class_<NetworkGraph>(m, "Graph")
      .def(py::init<>())
      .def("add_node", &NetworkGraph::add_node, py::arg("role"))
      .def("add_link", &NetworkGraph::add_link, py::arg("source"), py::arg("target"),
           py::arg("bandwidth"), py::arg("delay"))
      .def("node_count", &NetworkGraph::node_count)
      .def("link_count", &NetworkGraph::link_count)
      .def("role", &NetworkGraph::role, py::arg("node"))
      .def("links", &NetworkGraph::links)
      .def("server", &NetworkGraph::server)
      .def("clients", &NetworkGraph::clients)
      .def("validate", &NetworkGraph::validate)
      .def("scale_bandwidth", &NetworkGraph::scale_bandwidth, py::arg("factor"))
      .def("to_text", [](const NetworkGraph& g) { return config::write_topology(g); });

  m.def("parse_topology", &config::parse_topology, py::arg("path"));
  m.def("parse_topology_text", &config::parse_topology_text, py::arg("text"),
        py::arg("source") = "<text>");

  py::class_<config::ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("topology_path", &config::ExperimentConfig::topology_path)
      .def_readonly("profile", &config::ExperimentConfig::profile)
      .def_readonly("costs", &config::ExperimentConfig::costs)
      .def_readonly("seed", &config::ExperimentConfig::seed)
      .def_readonly("runs", &config::ExperimentConfig::runs)
      .def_readonly("nominal_bandwidth", &config::ExperimentConfig::nominal_bandwidth)
      .def_readonly("bandwidth_sweep", &config::ExperimentConfig::bandwidth_sweep)
      .def("topology_at", [](const config::ExperimentConfig& c, double bw) {
        return experiment::topology_at(c, bw);
      });
  m.def("load_config", &config::load_config, py::arg("path"));
  m.def("validate_config", [](const config::ExperimentConfig& cfg) {
    py::list out;
    for (const auto& c : experiment::validate(cfg)) out.append(py::make_tuple(c.name, c.pass, c.detail));
    return out;
  });

  m.def(
      "validate_costs",
      [](const prlnc::VideoProfile& p, const optimizer::CostVector& c) {
        py::list out;
        for (const auto& v : optimizer::validate_costs(p, c)) {
          py::dict d;
          d["layer"] = v.layer;
          d["rule"] = v.rule;
          d["value"] = v.value;
          d["bound"] = v.bound;
          d["message"] = v.message;
          out.append(d);
        }
        return out;
      },
      py::arg("profile"), py::arg("costs"));

  py::class_<optimizer::IntegerPlan>(m, "Plan")
      .def_readonly("level", &optimizer::IntegerPlan::level)
      .def_readonly("counts", &optimizer::IntegerPlan::counts)
      .def_readonly("r", &optimizer::IntegerPlan::r)
      .def_readonly("z", &optimizer::IntegerPlan::z)
      .def_readonly("objective", &optimizer::IntegerPlan::objective);

  py::class_<optimizer::RateAllocation>(m, "Allocation")
      .def_readonly("clients", &optimizer::RateAllocation::clients)
      .def_readonly("plan", &optimizer::RateAllocation::plan)
      .def_readonly("flows", &optimizer::RateAllocation::r_hat)
      .def_readonly("iterations", &optimizer::RateAllocation::iterations)
      .def_readonly("dual_bound", &optimizer::RateAllocation::dual_bound)
      .def("objective", &optimizer::RateAllocation::objective)
      .def("convergence", [](const optimizer::RateAllocation& a) {
        py::list out;
        for (const auto& row : a.trace) out.append(py::make_tuple(row.iter, row.dual, row.primal, row.source));
        return out;
      });

  m.def(
      "optimize",
      [](const NetworkGraph& g, const prlnc::VideoProfile& p, const optimizer::CostVector& c,
         int max_iter) {
        optimizer::OptimizerParams params;
        params.max_iter = max_iter;
        return optimizer::optimize(g, p, c, params);
      },
      py::arg("graph"), py::arg("profile"), py::arg("costs"), py::arg("max_iter") = 2000);

  m.def(
      "oracle_solve",
      [](const NetworkGraph& g, const prlnc::VideoProfile& p, const optimizer::CostVector& c) {
        const auto o = optimizer::oracle_solve(g, p, c);
        return py::make_tuple(o.objective, o.level);
      },
      py::arg("graph"), py::arg("profile"), py::arg("costs"));

  m.def(
      "simulate",
      [](const NetworkGraph& g, const prlnc::VideoProfile& p, const optimizer::RateAllocation& a,
         std::uint64_t seed, bool exact_bloom, int generations, bool trace) {
        config::SimParams params;
        params.exact_bloom = exact_bloom;
        params.generations = generations;
        std::ostringstream log;
        const auto rep = sim::run(g, p, a.clients, a.plan, params, seed, trace ? &log : nullptr);
        py::dict out;
        py::list clients;
        for (const auto& c : rep.clients) {
          py::dict d;
          d["node"] = c.node;
          d["psnr"] = c.psnr;
          d["layer"] = c.layer;
          d["mean_psnr"] = c.mean_psnr;
          d["issued"] = c.issued;
          d["delivered"] = c.delivered;
          d["non_innovative"] = c.non_innovative;
          d["identical"] = c.identical_deliveries;
          d["excess"] = c.excess_deliveries;
          clients.append(d);
        }
        out["clients"] = clients;
        out["events"] = rep.events;
        if (trace) out["trace"] = log.str();
        return out;
      },
      py::arg("graph"), py::arg("profile"), py::arg("allocation"), py::arg("seed") = 1,
      py::arg("exact_bloom") = false, py::arg("generations") = 40, py::arg("trace") = false);

  m.def("upper_bound_psnr", &sim::upper_bound_psnr, py::arg("graph"), py::arg("profile"),
        py::arg("clients"));

  m.def(
      "bloom_carriers",
      [](int z, const std::vector<std::pair<int, int>>& rates, int client) {
        const protocol::BloomParams exact{.exact = true};
        std::vector<int> out;
        for (int counter = z; counter >= 1; --counter) {
          if (protocol::build_bloom(counter, z, rates, exact).contains(client)) {
            out.push_back(z - counter + 1);
          }
        }
        return out;
      },
      py::arg("z"), py::arg("rates"), py::arg("client"),
      "1-based positions, among z forwarded Interests, whose filter names `client`.");
}
