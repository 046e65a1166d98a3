#include "pstore/object_model.hpp"

#include <set>

#include "pstore/codec.hpp"

namespace pstore {

std::string_view field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::kInt: return "INT";
    case FieldKind::kString: return "STRING";
    case FieldKind::kRef: return "REF";
  }
  return "?";
}

std::optional<FieldKind> parse_field_kind(std::string_view name) {
  if (name == "INT") return FieldKind::kInt;
  if (name == "STRING") return FieldKind::kString;
  if (name == "REF") return FieldKind::kRef;
  return std::nullopt;
}

std::optional<std::size_t> ClassDescriptor::field_index(std::string_view name) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == name) return i;
  return std::nullopt;
}

void ClassRegistry::add(ClassDescriptor cls) {
  auto it = classes_.find(cls.class_id);
  if (it != classes_.end()) {
    if (it->second == cls) return;
    throw Error(ErrorCode::kDuplicate, "class " + cls.class_id + " already registered with another schema");
  }
  std::string id = cls.class_id;
  classes_.emplace(std::move(id), std::move(cls));
}

const ClassDescriptor* ClassRegistry::find(std::string_view class_id) const {
  auto it = classes_.find(class_id);
  return it == classes_.end() ? nullptr : &it->second;
}

const ClassDescriptor& ClassRegistry::get(std::string_view class_id) const {
  if (const auto* c = find(class_id)) return *c;
  throw Error(ErrorCode::kNotFound, "unknown class " + std::string(class_id));
}

std::vector<std::string> ClassRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : classes_) out.push_back(id);
  return out;
}

FieldKind kind_of(const FieldValue& v) {
  switch (v.index()) {
    case 0: return FieldKind::kInt;
    case 1: return FieldKind::kString;
    default: return FieldKind::kRef;
  }
}

std::string format_value(const FieldValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  const auto& r = std::get<Ref>(v);
  return r ? r->hex() : "null";
}

ObjectNode ObjectNode::blank(const ClassDescriptor& cls) {
  ObjectNode obj;
  obj.class_id = cls.class_id;
  for (const auto& f : cls.fields) {
    switch (f.kind) {
      case FieldKind::kInt: obj.fields.emplace_back(std::int64_t{0}); break;
      case FieldKind::kString: obj.fields.emplace_back(std::string{}); break;
      case FieldKind::kRef: obj.fields.emplace_back(Ref{}); break;
    }
  }
  return obj;
}

Data reify(const ObjectNode& obj, const ClassDescriptor& cls) {
  if (obj.class_id != cls.class_id)
    throw Error(ErrorCode::kEncodingError, "object of class " + obj.class_id + " encoded as " + cls.class_id);
  if (obj.fields.size() != cls.fields.size())
    throw Error(ErrorCode::kEncodingError, "field count mismatch for class " + cls.class_id);
  ByteWriter w;
  w.str(cls.class_id);
  for (std::size_t i = 0; i < cls.fields.size(); ++i) {
    const FieldValue& v = obj.fields[i];
    if (kind_of(v) != cls.fields[i].kind)
      throw Error(ErrorCode::kEncodingError, "field " + cls.fields[i].name + " holds the wrong kind");
    switch (cls.fields[i].kind) {
      case FieldKind::kInt: w.i64(std::get<std::int64_t>(v)); break;
      case FieldKind::kString: w.str(std::get<std::string>(v)); break;
      case FieldKind::kRef: {
        const Ref& r = std::get<Ref>(v);
        w.u8(r ? 1 : 0);
        if (r) w.key(r->key);
        break;
      }
    }
  }
  return w.take();
}

ObjectNode instantiate_object(std::span<const std::uint8_t> data, const ClassDescriptor& cls) {
  ByteReader r(data);
  ObjectNode obj;
  obj.class_id = r.str();
  if (obj.class_id != cls.class_id)
    throw Error(ErrorCode::kDecodeError, "state of class " + obj.class_id + " decoded as " + cls.class_id);
  for (const auto& f : cls.fields) {
    switch (f.kind) {
      case FieldKind::kInt: obj.fields.emplace_back(r.i64()); break;
      case FieldKind::kString: obj.fields.emplace_back(r.str()); break;
      case FieldKind::kRef: {
        std::uint8_t present = r.u8();
        if (present > 1) throw Error(ErrorCode::kDecodeError, "bad presence byte");
        obj.fields.emplace_back(present ? Ref{Guid{r.key()}} : Ref{});
        break;
      }
    }
  }
  r.expect_done();
  return obj;
}

std::vector<const ObjectNode*> closure(const ObjectNode& root, const ChildResolver& resolve,
                                       const ClosureFilter& include) {
  std::vector<const ObjectNode*> out;
  if (include && !include(root)) return out;
  std::set<Guid> visited;
  if (root.guid) visited.insert(*root.guid);

  // Explicit stack of pending children; an object is resolved and marked when
  // popped, which gives the same order as the recursive pre-order walk.
  std::vector<Guid> stack;
  auto push_children = [&](const ObjectNode& node) {
    for (auto it = node.fields.rbegin(); it != node.fields.rend(); ++it) {
      const Ref* r = std::get_if<Ref>(&*it);
      if (r && *r && !visited.contains(**r)) stack.push_back(**r);
    }
  };
  out.push_back(&root);
  push_children(root);
  while (!stack.empty()) {
    Guid g = stack.back();
    stack.pop_back();
    if (visited.contains(g)) continue;
    const ObjectNode* child = resolve(g);
    if (!child) throw ResolutionError(g);
    visited.insert(g);
    if (include && !include(*child)) continue;
    out.push_back(child);
    push_children(*child);
  }
  return out;
}

}  // namespace pstore
