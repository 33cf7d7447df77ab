#include <json.hpp>

#include "cmsovc/structures.hpp"

namespace cmsovc {

using ordered_json = nlohmann::ordered_json;

std::string print_structure(const Structure& s) {
  ordered_json doc;
  doc["kind"] = std::string(to_string(s.kind()));
  ordered_json sig = ordered_json::object();
  for (const auto& r : s.signature().relations()) sig[r.name] = r.arity;
  doc["signature"] = sig;
  doc["domain"] = s.domain();
  ordered_json rels = ordered_json::object();
  for (std::size_t r = 0; r < s.signature().size(); ++r) {
    ordered_json rows = ordered_json::array();
    for (const auto& t : s.tuples(r)) {
      ordered_json row = ordered_json::array();
      for (int e : t) row.push_back(s.element(e));
      rows.push_back(std::move(row));
    }
    rels[s.signature().relations()[r].name] = std::move(rows);
  }
  doc["relations"] = rels;
  return doc.dump(2) + "\n";
}

Structure parse_structure(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("structure file: ") + e.what(), e.byte);
  }
  try {
    const auto kind = structure_kind_from_string(doc.at("kind").get<std::string>());
    std::vector<RelationSymbol> rels;
    for (const auto& [name, arity] : doc.at("signature").items()) rels.push_back({name, arity.get<int>()});
    auto domain = doc.at("domain").get<std::vector<std::string>>();
    RelationContents rc;
    if (doc.contains("relations")) {
      for (const auto& [name, rows] : doc.at("relations").items()) {
        auto& out = rc[name];
        for (const auto& row : rows) out.push_back(row.get<std::vector<std::string>>());
      }
    }
    return build_structure(Signature(std::move(rels)), std::move(domain), rc, kind);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("structure file: ") + e.what(), 0);
  }
}

}  // namespace cmsovc
