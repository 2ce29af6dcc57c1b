#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rb1/lowering.hpp"
#include "rb1/runtime.hpp"
#include "rb1/serialize.hpp"
#include "rb1/tools.hpp"

namespace py = pybind11;
using namespace rb1;

namespace {

int act_index(const Program& p, const std::optional<std::string>& act) { return act ? p.act(*act) : p.default_act(); }

py::tuple action_tuple(const ActionValue& a) { return py::make_tuple(a.name, a.args); }

}  // namespace

PYBIND11_MODULE(_rb1, m) {
  m.doc() = "rb1 compiler and runtime";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error)(e.what());
      inst.attr("kind") = e.kind();
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<Program, std::shared_ptr<Program>>(m, "Program")
      .def_static("compile", [](const std::string& src) { return std::const_pointer_cast<Program>(Program::compile(src)); })
      .def_static("compile_file",
                  [](const std::string& path) { return std::const_pointer_cast<Program>(Program::compile_file(path)); })
      .def("act", [](const Program& p, const std::string& name) { return p.act(name); })
      .def_property_readonly("default_act", &Program::default_act)
      .def("warnings",
           [](const Program& p) {
             std::vector<std::string> out;
             for (const auto& w : p.warnings()) out.push_back(format_warning("<source>", w));
             return out;
           })
      .def("interface_description", [](const Program& p) { return interface_description(p); })
      .def(
          "dot", [](const Program& p, std::optional<std::string> act) { return export_dot(build_afg(p.machine(act_index(p, act)))); },
          py::arg("act") = py::none())
      .def(
          "tensor_size", [](const Program& p, std::optional<std::string> act) { return tensor_size(p, act_index(p, act)); },
          py::arg("act") = py::none())
      .def(
          "action_table",
          [](const Program& p, std::optional<std::string> act) {
            const ActionTable& t = p.action_table(act_index(p, act));
            py::list out;
            for (std::size_t i = 0; i < t.size(); ++i) out.append(action_tuple(t.at(i)));
            return out;
          },
          py::arg("act") = py::none())
      .def(
          "run",
          [](std::shared_ptr<Program> p, const std::string& fun) -> py::object {
            ProgramPtr cp = p;
            Value v = run_function(cp, fun, {});
            if (v.slots.empty()) return py::none();
            try {
              return py::cast(to_scalar(cp->module(), v));
            } catch (const Error&) {
              return py::cast(value_to_text(cp->module(), v));
            }
          },
          py::arg("fun") = "main")
      .def(
          "fuzz",
          [](std::shared_ptr<Program> p, std::optional<std::string> act, std::uint64_t seed, std::int64_t traces,
             std::int64_t max_steps) {
            FuzzOptions o;
            o.act = act_index(*p, act);
            o.seed = seed;
            o.traces = traces;
            o.max_steps = max_steps;
            py::gil_scoped_release release;
            return to_json(fuzz(p, o));
          },
          py::arg("act") = py::none(), py::arg("seed") = 1, py::arg("traces") = 1000, py::arg("max_steps") = 1000)
      .def(
          "bench",
          [](std::shared_ptr<Program> p, std::optional<std::string> act, std::int64_t traces, std::uint64_t seed,
             bool action_log) {
            BenchOptions o;
            o.act = act_index(*p, act);
            o.traces = traces;
            o.seed = seed;
            o.action_log = action_log;
            py::gil_scoped_release release;
            return to_json(bench(p, o));
          },
          py::arg("act") = py::none(), py::arg("traces") = 1024, py::arg("seed") = 1, py::arg("action_log") = false);

  py::class_<EnvironmentInstance>(m, "Environment")
      .def(py::init([](std::shared_ptr<Program> p, std::optional<std::string> act, std::vector<Scalar> args) {
             return EnvironmentInstance::instantiate(p, act_index(*p, act), args);
           }),
           py::arg("program"), py::arg("act") = py::none(), py::arg("args") = std::vector<Scalar>{})
      .def_static(
          "from_binary",
          [](std::shared_ptr<Program> p, const py::bytes& data, std::optional<std::string> act) {
            std::string s = data;
            return from_binary(p, act_index(*p, act), std::vector<std::uint8_t>(s.begin(), s.end()));
          },
          py::arg("program"), py::arg("data"), py::arg("act") = py::none())
      .def_static(
          "from_text",
          [](std::shared_ptr<Program> p, const std::string& text, std::optional<std::string> act) {
            return from_text(p, act_index(*p, act), text);
          },
          py::arg("program"), py::arg("text"), py::arg("act") = py::none())
      .def_property_readonly("is_done", &EnvironmentInstance::is_done)
      .def_property_readonly("resume_idx", &EnvironmentInstance::resume_idx)
      .def("can_apply",
           [](const EnvironmentInstance& e, const std::string& name, std::vector<Scalar> args) {
             return e.can_apply({name, std::move(args)});
           })
      .def("apply",
           [](EnvironmentInstance& e, const std::string& name, std::vector<Scalar> args) {
             e.apply({name, std::move(args)});
           })
      .def("can_apply_index", &EnvironmentInstance::can_apply_index)
      .def("apply_index", &EnvironmentInstance::apply_index)
      .def("legal_indices", &EnvironmentInstance::legal_indices)
      .def("legal_actions",
           [](const EnvironmentInstance& e) {
             py::list out;
             for (const auto& a : e.legal_actions()) out.append(action_tuple(a));
             return out;
           })
      .def("get", &EnvironmentInstance::get_scalar)
      .def("set", &EnvironmentInstance::set_scalar)
      .def("to_binary",
           [](const EnvironmentInstance& e) {
             auto b = to_binary(e);
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def("to_text", [](const EnvironmentInstance& e) { return to_text(e); })
      .def("observation_tensor", [](const EnvironmentInstance& e, int observer) { return observation_tensor(e, observer); },
           py::arg("observer") = 0)
      .def("score", [](const EnvironmentInstance& e, int player) { return score(e, player); })
      .def("copy", [](const EnvironmentInstance& e) { return EnvironmentInstance(e); })
      .def("__eq__", [](const EnvironmentInstance& a, const EnvironmentInstance& b) { return a == b; })
      .def("__repr__", [](const EnvironmentInstance& e) { return to_text(e); });

  py::class_<SplitMix64>(m, "SplitMix64")
      .def(py::init<std::uint64_t>())
      .def("next", &SplitMix64::next)
      .def("below", &SplitMix64::below);
}
