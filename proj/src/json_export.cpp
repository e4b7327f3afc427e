#include <json.hpp>

#include "dartwin/model.hpp"

namespace dartwin {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json id_or_null(const std::optional<ElementId>& id) {
  return id ? ordered_json(id->value) : ordered_json(nullptr);
}

ordered_json endpoints(const std::optional<EndpointIds>& ends) {
  if (!ends) return nullptr;
  ordered_json j;
  j["source"] = ends->first.value;
  j["target"] = ends->second.value;
  return j;
}

}  // namespace

std::string export_json(const SemanticModel& model) {
  ordered_json doc;
  ordered_json elements = ordered_json::array();
  for (const Element& e : model.elements()) {
    ordered_json j;
    j["id"] = e.id.value;
    j["kind"] = std::string(to_string(e.kind));
    j["name"] = e.name ? ordered_json(*e.name) : ordered_json(nullptr);
    j["owner"] = id_or_null(e.owner);
    ordered_json members = ordered_json::array();
    for (ElementId m : e.members) members.push_back(m.value);
    j["members"] = std::move(members);
    ordered_json specializes = ordered_json::array();
    for (ElementId s : e.specializes) specializes.push_back(s.value);
    j["specializes"] = std::move(specializes);
    j["redefines"] = id_or_null(e.redefines);
    j["connect"] = endpoints(e.connect);
    j["allocate"] = endpoints(e.allocate);
    j["typed_by"] = id_or_null(e.typed_by);
    j["doc"] = e.doc ? ordered_json(*e.doc) : ordered_json(nullptr);
    elements.push_back(std::move(j));
  }
  doc["elements"] = std::move(elements);
  ordered_json roots = ordered_json::array();
  for (ElementId r : model.roots()) roots.push_back(r.value);
  doc["roots"] = std::move(roots);
  return doc.dump(2) + "\n";
}

}  // namespace dartwin
