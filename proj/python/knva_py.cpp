#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "knva/atlas.hpp"
#include "knva/distr.hpp"
#include "knva/errors.hpp"
#include "knva/tables.hpp"
#include "knva/vertex.hpp"

namespace py = pybind11;
using namespace knva;

// Structured values cross the boundary as JSON text; the Python package decodes them.
namespace {

std::string dumps(const json& j) { return j.dump(); }

int index_of(const StructureTables& t, const std::string& text) { return parse_index(text, t.genus); }

std::vector<FockVector> states_up_to(const FieldContext& ctx, int max_degree) {
  return basis_states(ctx.kind(), max_degree);
}

}  // namespace

PYBIND11_MODULE(_knva, m) {
  m.doc() = "Krichever-Novikov bases, residue tables and the higher-genus Heisenberg vertex algebra";

  // translators run newest first, so the base class goes in before its subclasses
  auto base = py::register_exception<Error>(m, "KnvaError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<WindowError>(m, "WindowError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());

  py::class_<BasisAtlas>(m, "Atlas")
      .def_property_readonly("genus", &BasisAtlas::genus)
      .def_property_readonly("window", [](const BasisAtlas& a) { return index_str(a.config.window); })
      .def_property_readonly("config_json", [](const BasisAtlas& a) { return dumps(to_json(a.config)); })
      .def("save", [](const BasisAtlas& a, const std::string& path) { save_atlas(a, path); })
      .def("verify_duality_json", [](const BasisAtlas& a) { return dumps(verify_duality(a).to_json()); });

  m.def("build_atlas", [](const std::string& config_json) {
    AtlasConfig c = atlas_config_from_json(json::parse(config_json));
    c.validate();
    return build_atlas(c);
  });
  m.def("load_atlas", &load_atlas);

  py::class_<StructureTables>(m, "Tables")
      .def_readonly("genus", &StructureTables::genus)
      .def_property_readonly("window", [](const StructureTables& t) { return index_str(t.window); })
      .def_readonly("sigma", &StructureTables::sigma)
      .def("gamma", [](const StructureTables& t, const std::string& n, const std::string& k) {
        return t.gamma_at(index_of(t, n), index_of(t, k)).str();
      })
      .def("alpha", [](const StructureTables& t, const std::string& k, const std::string& n, const std::string& m2) {
        return t.alpha_at(index_of(t, k), index_of(t, n), index_of(t, m2)).str();
      })
      .def("zeta", [](const StructureTables& t, const std::string& n, const std::string& u) {
        return t.zeta_at(index_of(t, n), index_of(t, u)).str();
      })
      .def("save", [](const StructureTables& t, const std::string& path) { save_tables(t, path); })
      .def("band_summary_json", [](const StructureTables& t) { return dumps(band_summary(t)); })
      .def("check_bands_json", [](const StructureTables& t) { return dumps(check_bands(t).to_json()); });

  m.def("compute_tables", [](const BasisAtlas& a) { return compute_tables(a); });
  m.def("load_tables", &load_tables);

  m.def("state_field", [](const std::string& state) { return Y(parse_monomial(state)).str(); });

  py::class_<FieldContext>(m, "FieldContext")
      .def(py::init<const StructureTables&>(), py::keep_alive<1, 2>())
      .def("coefficient",
           [](FieldContext& c, const std::string& field, const std::string& n, int budget) {
             return c.coefficient(parse_field(field), index_of(c.tables(), n), budget).str(c.genus());
           })
      .def("apply_json",
           [](FieldContext& c, const std::string& field, const std::string& n, const std::string& state) {
             FockVector v = c.fock().parse_state(state);
             return dumps(c.apply(parse_field(field), index_of(c.tables(), n), v).to_json());
           })
      .def("check_vacuum_json",
           [](FieldContext& c, const std::string& field) { return dumps(check_vacuum(c, parse_field(field)).to_json()); })
      .def("check_translation_json",
           [](FieldContext& c, const std::string& field, int max_degree, int range2) {
             return dumps(check_translation(c, parse_field(field), states_up_to(c, max_degree), range2).to_json());
           })
      .def("check_locality_json",
           [](FieldContext& c, const std::string& a, const std::string& b, int max_degree, int range2) {
             return dumps(
                 check_locality(c, parse_field(a), parse_field(b), states_up_to(c, max_degree), range2).to_json());
           })
      .def("check_wick_json",
           [](FieldContext& c, const std::string& a, const std::string& b, int max_degree, int range2) {
             return dumps(check_wick(c, parse_field(a), parse_field(b), states_up_to(c, max_degree), range2).to_json());
           });

  m.def("affine_bracket", [](const StructureTables& t, const std::string& lie_name, const std::string& x,
                             const std::string& n, const std::string& y, const std::string& k) {
    LieAlgebraData lie = lie_by_name(lie_name);
    return affine_bracket(t, lie, lie.label_index(x), index_of(t, n), lie.label_index(y), index_of(t, k)).str(lie);
  });
  m.def("check_affine_jacobi_json", [](const StructureTables& t, const std::string& lie_name, int range2) {
    return dumps(check_affine_jacobi(t, lie_by_name(lie_name), range2).to_json());
  });
  m.def("check_dP_delta_json", [](const BasisAtlas& a, const StructureTables& t) {
    return dumps(check_dP_delta(a, t).to_json());
  });

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
