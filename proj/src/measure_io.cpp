#include "lqwidth/measure_io.hpp"

#include <fstream>
#include <sstream>

namespace lqwidth {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw MeasureParseError(path, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw MeasureParseError(path + "/" + key, "is required");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw MeasureParseError(path, "must be a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw MeasureParseError(path, "must be an integer");
  return v.get<std::int64_t>();
}

std::size_t as_dim(const json& obj, const std::string& path) {
  const auto d = as_int(field(obj, "dimension", path), path + "/dimension");
  if (d < 1) throw MeasureParseError(path + "/dimension", "must be >= 1");
  return static_cast<std::size_t>(d);
}

std::vector<double> as_number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw MeasureParseError(path, "must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "/" + std::to_string(i)));
  }
  return out;
}

Dyadic as_dyadic(const json& v, const std::string& path) {
  if (v.is_number_integer()) return {v.get<std::int64_t>(), 0};
  const auto num = as_int(field(v, "num", path), path + "/num");
  const auto l2 = as_int(field(v, "log2_den", path), path + "/log2_den");
  if (l2 < 0 || l2 > 62) throw MeasureParseError(path + "/log2_den", "must be in [0, 62]");
  return {num, static_cast<int>(l2)};
}

json dyadic_to_json(const Dyadic& d) { return {{"num", d.num}, {"log2_den", d.log2_den}}; }

MeasureSpec parse_at(const json& doc, const std::string& path) {
  const auto& tag = field(doc, "type", path);
  if (!tag.is_string()) throw MeasureParseError(path + "/type", "must be a string");
  const std::string type = tag.get<std::string>();

  if (type == "lebesgue") return Lebesgue{as_dim(doc, path)};

  if (type == "dyadic_ifs") {
    DyadicIFS s;
    s.dim = as_dim(doc, path);
    const auto& maps = field(doc, "maps", path);
    if (!maps.is_array()) throw MeasureParseError(path + "/maps", "must be an array");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const std::string mp = path + "/maps/" + std::to_string(i);
      DyadicMap m;
      const auto e = as_int(field(maps[i], "ratio_exponent", mp), mp + "/ratio_exponent");
      if (e < 1) throw MeasureParseError(mp + "/ratio_exponent", "must be >= 1");
      m.ratio_exp = static_cast<unsigned>(e);
      const auto& off = field(maps[i], "offset", mp);
      if (!off.is_array()) throw MeasureParseError(mp + "/offset", "must be an array");
      for (std::size_t k = 0; k < off.size(); ++k) {
        m.offset.push_back(as_dyadic(off[k], mp + "/offset/" + std::to_string(k)));
      }
      s.maps.push_back(std::move(m));
    }
    s.weights = as_number_array(field(doc, "weights", path), path + "/weights");
    return s;
  }

  if (type == "ifs_1d") {
    GeneralIFS1D s;
    const auto& maps = field(doc, "maps", path);
    if (!maps.is_array()) throw MeasureParseError(path + "/maps", "must be an array");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const std::string mp = path + "/maps/" + std::to_string(i);
      s.maps.push_back({as_number(field(maps[i], "ratio", mp), mp + "/ratio"),
                        as_number(field(maps[i], "offset", mp), mp + "/offset")});
    }
    s.weights = as_number_array(field(doc, "weights", path), path + "/weights");
    if (doc.contains("tolerance")) s.tolerance = as_number(doc["tolerance"], path + "/tolerance");
    return s;
  }

  if (type == "atomic") {
    if (doc.contains("generator")) {
      const auto& gen = doc["generator"];
      if (gen != "exp_harmonic") {
        throw MeasureParseError(path + "/generator", "unknown generator (expected exp_harmonic)");
      }
      const auto cutoff = as_int(field(doc, "cutoff", path), path + "/cutoff");
      if (cutoff < 1) throw MeasureParseError(path + "/cutoff", "must be >= 1");
      return exp_harmonic_atoms(static_cast<unsigned>(cutoff));
    }
    Atomic s;
    s.dim = as_dim(doc, path);
    const auto& atoms = field(doc, "atoms", path);
    if (!atoms.is_array()) throw MeasureParseError(path + "/atoms", "must be an array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string ap = path + "/atoms/" + std::to_string(i);
      Atom a;
      const auto& pt = field(atoms[i], "point", ap);
      a.point = pt.is_array() ? as_number_array(pt, ap + "/point")
                              : std::vector<double>{as_number(pt, ap + "/point")};
      a.weight = as_number(field(atoms[i], "weight", ap), ap + "/weight");
      s.atoms.push_back(std::move(a));
    }
    return s;
  }

  if (type == "dyadic_density") {
    DyadicDensity s;
    s.dim = as_dim(doc, path);
    const auto depth = as_int(field(doc, "depth", path), path + "/depth");
    if (depth < 0) throw MeasureParseError(path + "/depth", "must be >= 0");
    s.depth = static_cast<unsigned>(depth);
    s.density = as_number_array(field(doc, "density", path), path + "/density");
    return s;
  }

  if (type == "mixture") {
    Mixture s;
    const auto& comps = field(doc, "components", path);
    if (!comps.is_array()) throw MeasureParseError(path + "/components", "must be an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string cp = path + "/components/" + std::to_string(i);
      s.components.push_back({as_number(field(comps[i], "coefficient", cp), cp + "/coefficient"),
                              parse_at(field(comps[i], "measure", cp), cp + "/measure")});
    }
    return s;
  }

  throw MeasureParseError(path + "/type", "unknown type '" + type +
                                              "' (expected lebesgue, dyadic_ifs, ifs_1d, "
                                              "atomic, dyadic_density or mixture)");
}

}  // namespace

MeasureParseError::MeasureParseError(std::string field, const std::string& constraint)
    : std::runtime_error("measure spec field '" + (field.empty() ? "/" : field) + "' " +
                         constraint),
      field_(std::move(field)) {}

MeasureSpec measure_from_json(const json& doc) { return parse_at(doc, ""); }

json measure_to_json(const MeasureSpec& spec) {
  json out;
  out["type"] = type_name(spec);
  if (const auto* s = std::get_if<Lebesgue>(&spec.value)) {
    out["dimension"] = s->dim;
  } else if (const auto* s = std::get_if<DyadicIFS>(&spec.value)) {
    out["dimension"] = s->dim;
    out["maps"] = json::array();
    for (const auto& m : s->maps) {
      json off = json::array();
      for (const auto& d : m.offset) off.push_back(dyadic_to_json(d));
      out["maps"].push_back({{"ratio_exponent", m.ratio_exp}, {"offset", off}});
    }
    out["weights"] = s->weights;
  } else if (const auto* s = std::get_if<GeneralIFS1D>(&spec.value)) {
    out["maps"] = json::array();
    for (const auto& m : s->maps) out["maps"].push_back({{"ratio", m.ratio}, {"offset", m.offset}});
    out["weights"] = s->weights;
    out["tolerance"] = s->tolerance;
  } else if (const auto* s = std::get_if<Atomic>(&spec.value)) {
    out["dimension"] = s->dim;
    out["atoms"] = json::array();
    for (const auto& a : s->atoms) out["atoms"].push_back({{"point", a.point}, {"weight", a.weight}});
  } else if (const auto* s = std::get_if<DyadicDensity>(&spec.value)) {
    out["dimension"] = s->dim;
    out["depth"] = s->depth;
    out["density"] = s->density;
  } else if (const auto* s = std::get_if<Mixture>(&spec.value)) {
    out["components"] = json::array();
    for (const auto& c : s->components) {
      out["components"].push_back(
          {{"coefficient", c.coefficient}, {"measure", measure_to_json(c.spec)}});
    }
  }
  return out;
}

MeasureSpec parse_measure_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeasureParseError("", "file '" + path.string() + "' is not readable");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw MeasureParseError("", std::string("is not valid JSON: ") + e.what());
  }
  MeasureSpec spec = measure_from_json(doc);
  require_valid(spec);
  return spec;
}

}  // namespace lqwidth
