#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pstore/error.hpp"
#include "pstore/keyspace.hpp"

namespace pstore {

enum class FieldKind : std::uint8_t { kInt, kString, kRef };

std::string_view field_kind_name(FieldKind kind);
std::optional<FieldKind> parse_field_kind(std::string_view name);

struct FieldSpec {
  std::string name;
  FieldKind kind;
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

struct ClassDescriptor {
  std::string class_id;
  std::vector<FieldSpec> fields;

  std::optional<std::size_t> field_index(std::string_view name) const;
  friend bool operator==(const ClassDescriptor&, const ClassDescriptor&) = default;
};

// Class descriptors known to every node. Re-adding an identical descriptor is
// a no-op; a different schema under an existing id is rejected.
class ClassRegistry {
 public:
  void add(ClassDescriptor cls);
  const ClassDescriptor* find(std::string_view class_id) const;
  const ClassDescriptor& get(std::string_view class_id) const;  // throws kNotFound
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, ClassDescriptor, std::less<>> classes_;
};

/// An abstract reference field: a GUID or null. Never a memory link.
using Ref = std::optional<Guid>;
using FieldValue = std::variant<std::int64_t, std::string, Ref>;

FieldKind kind_of(const FieldValue& v);
std::string format_value(const FieldValue& v);

struct ObjectNode {
  std::optional<Guid> guid;  // lazily allocated
  std::string class_id;
  std::vector<FieldValue> fields;  // schema order

  /// Default values for every field of the class (0, "", null).
  static ObjectNode blank(const ClassDescriptor& cls);

  // Field-for-field state comparison; identity is not part of state.
  bool same_state(const ObjectNode& other) const {
    return class_id == other.class_id && fields == other.fields;
  }
};

/// Canonical encoding: classId (u32 length + bytes), then each field in schema
/// order. INT is 8-byte big-endian two's complement, STRING is u32 length +
/// UTF-8, REF is a presence byte followed by the 20 GUID bytes when present.
/// Throws kEncodingError when the object does not conform to the schema.
Data reify(const ObjectNode& obj, const ClassDescriptor& cls);

/// Inverse of reify. The returned object has no GUID. Throws kDecodeError on
/// malformed bytes, trailing bytes, or a classId that does not match.
ObjectNode instantiate_object(std::span<const std::uint8_t> data, const ClassDescriptor& cls);

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const Guid& missing)
      : Error(ErrorCode::kResolutionError, "unresolvable child " + missing.hex()), missing_(missing) {}
  const Guid& missing() const { return missing_; }

 private:
  Guid missing_;
};

/// Maps a child GUID to its object; nullptr when it cannot be resolved.
using ChildResolver = std::function<const ObjectNode*(const Guid&)>;
/// Returns false for objects that must be left out of the closure. Excluded
/// objects are not descended into.
using ClosureFilter = std::function<bool(const ObjectNode&)>;

/// Depth-first pre-order over REF fields in schema order, each object once.
/// Throws ResolutionError naming the first child the resolver cannot supply.
std::vector<const ObjectNode*> closure(const ObjectNode& root, const ChildResolver& resolve,
                                       const ClosureFilter& include = {});

}  // namespace pstore
