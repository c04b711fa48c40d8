#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dhmc/app/commands.hpp"
#include "dhmc/app/config.hpp"
#include "dhmc/core.hpp"
#include "dhmc/diagnostics.hpp"
#include "dhmc/errors.hpp"
#include "dhmc/samplers.hpp"

namespace py = pybind11;
using dhmc::app::Json;

namespace {

// Python objects cross the boundary as JSON text.
Json to_json(const py::handle& obj) {
  if (obj.is_none()) return Json::object();
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object from_json(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

struct PyModel {
  dhmc::app::ModelSpec spec;
  dhmc::app::BuiltModel built;

  const dhmc::TargetModel& target() const { return *built.model; }
};

PyModel make_model(const std::string& name, const py::object& params, const std::optional<std::string>& data,
                   std::uint64_t synth_seed) {
  PyModel m;
  m.spec.name = name;
  m.spec.params = to_json(params);
  if (data) m.spec.data = std::filesystem::absolute(*data);
  m.spec.synth_seed = synth_seed;
  m.built = dhmc::app::build_model(m.spec);
  return m;
}

Json spec_json(const dhmc::app::ModelSpec& spec) {
  Json j = {{"name", spec.name}, {"params", spec.params}, {"synth_seed", spec.synth_seed}};
  if (spec.data) j["data"] = spec.data->string();
  return j;
}

py::dict run_chain(const PyModel& m, const py::object& sampler, const std::optional<std::vector<double>>& init,
                   std::uint64_t seed) {
  Json cfg_json = {{"model", spec_json(m.spec)}, {"sampler", to_json(sampler)}, {"seed", seed}};
  if (init) cfg_json["init"] = *init;
  const auto cfg = dhmc::app::parse_run_config(cfg_json);
  const auto rs = dhmc::app::resolve_run(cfg, m.target());

  dhmc::ChainResult res;
  {
    py::gil_scoped_release release;
    res = dhmc::run_chain(m.target(), rs.init, rs.sampler);
  }

  const auto& store = res.samples;
  py::array_t<double> draws({store.rows(), store.cols()});
  auto out = draws.mutable_unchecked<2>();
  for (std::size_t c = 0; c < store.cols(); ++c) {
    const auto& col = store.column(c);
    for (std::size_t r = 0; r < store.rows(); ++r) out(r, c) = col[r];
  }
  std::vector<double> accept, delta_h;
  std::vector<std::size_t> flips;
  for (const auto& t : res.trace) {
    accept.push_back(t.accept_prob);
    delta_h.push_back(t.delta_H);
    flips.push_back(t.flips);
  }
  py::dict d;
  d["names"] = store.names();
  d["draws"] = draws;
  d["accept_prob"] = py::array_t<double>(accept.size(), accept.data());
  d["delta_H"] = py::array_t<double>(delta_h.size(), delta_h.data());
  d["flips"] = flips;
  d["divergences"] = res.divergences;
  d["potential_evals"] = res.potential_evals;
  d["gradient_evals"] = res.gradient_evals;
  d["final_eps"] = res.tuning.final_eps;
  d["final_theta"] = res.final_theta;
  return d;
}

dhmc::app::RunOverrides overrides(const std::optional<std::string>& out, std::optional<std::size_t> chains,
                                  std::optional<std::uint64_t> seed) {
  dhmc::app::RunOverrides o;
  if (out) o.out = *out;
  o.chains = chains;
  o.seed = seed;
  return o;
}

}  // namespace

PYBIND11_MODULE(_dhmc, mod) {
  mod.doc() = "Discontinuous Hamiltonian Monte Carlo";

  py::register_exception<dhmc::ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<dhmc::DataError>(mod, "DataError", PyExc_OSError);
  py::register_exception<dhmc::ContractError>(mod, "ContractError", PyExc_ValueError);
  py::register_exception<dhmc::ModelError>(mod, "ModelError", PyExc_ArithmeticError);
  py::register_exception<dhmc::OutOfSupport>(mod, "OutOfSupport", PyExc_ValueError);
  py::register_exception<dhmc::UndefinedStatistic>(mod, "UndefinedStatistic", PyExc_ArithmeticError);
  py::register_exception<dhmc::UnsupportedTarget>(mod, "UnsupportedTarget", PyExc_ValueError);

  mod.def("model_names", &dhmc::app::model_names);

  py::class_<PyModel>(mod, "Model")
      .def(py::init(&make_model), py::arg("name"), py::arg("params") = py::none(), py::arg("data") = py::none(),
           py::arg("synth_seed") = 1)
      .def_property_readonly("name", [](const PyModel& m) { return m.target().name(); })
      .def_property_readonly("dim", [](const PyModel& m) { return m.target().dim(); })
      .def_property_readonly("truth", [](const PyModel& m) { return from_json(m.built.truth); })
      .def("parameter_names", [](const PyModel& m) { return m.target().parameter_names(); })
      .def("initial_point", [](const PyModel& m) { return m.target().initial_point(); })
      .def("is_embedded", [](const PyModel& m, std::size_t j) { return m.target().embedding(j) != nullptr; })
      .def("potential",
           [](const PyModel& m, const std::vector<double>& theta) {
             if (theta.size() != m.target().dim()) throw dhmc::ContractError("theta has the wrong dimension");
             return dhmc::checked_potential(m.target(), theta);
           })
      .def("__repr__", [](const PyModel& m) {
        std::ostringstream s;
        s << "<dhmc.Model " << m.target().name() << " dim=" << m.target().dim() << ">";
        return s.str();
      });

  mod.def("run_chain", &run_chain, py::arg("model"), py::arg("sampler") = py::none(), py::arg("init") = py::none(),
          py::arg("seed") = 0, "One chain in memory; `sampler` takes the keys of the config file's sampler section.");

  mod.def(
      "batch_means_ess",
      [](const std::vector<double>& x, std::size_t batches) { return dhmc::batch_means_ess(x, batches); },
      py::arg("x"), py::arg("batches") = dhmc::kDefaultBatches);

  mod.def(
      "kinetic_energy",
      [](const std::vector<double>& p, const std::vector<double>& mass, const std::vector<std::size_t>& disc) {
        return dhmc::kinetic_energy(p, dhmc::MassSpec{mass, std::nullopt}, dhmc::Partition::from_disc(p.size(), disc));
      },
      py::arg("p"), py::arg("mass"), py::arg("disc"));

  mod.def(
      "run",
      [](const py::object& config, const std::optional<std::string>& out, std::optional<std::size_t> chains,
         std::optional<std::uint64_t> seed) {
        const auto o = overrides(out, chains, seed);
        if (py::isinstance<py::str>(config)) return dhmc::app::cmd_run(std::filesystem::path(config.cast<std::string>()), o);
        return dhmc::app::cmd_run(dhmc::app::parse_run_config(to_json(config), std::filesystem::current_path()), o);
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("chains") = py::none(), py::arg("seed") = py::none(),
      "Writes a run directory from a config path or dict and returns it.");

  mod.def(
      "diagnose", [](const std::string& dir) { return from_json(dhmc::app::cmd_diagnose(dir)); }, py::arg("run_dir"));

  mod.def(
      "compare",
      [](const std::vector<std::string>& dirs, const std::string& out) {
        std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
        std::ostringstream table;
        const auto rows = dhmc::app::cmd_compare(paths, out, table);
        py::list result;
        for (const auto& r : rows) {
          py::dict d;
          d["run"] = r.label;
          d["kernel"] = r.kernel;
          d["chains"] = r.chains;
          d["min_ess"] = r.min_ess;
          d["ess_per_100"] = r.ess_per_100;
          d["ess_per_1e6_evals"] = r.ess_per_1e6_evals;
          d["relative_cost"] = r.relative_cost;
          result.append(d);
        }
        return result;
      },
      py::arg("run_dirs"), py::arg("out"));
}
