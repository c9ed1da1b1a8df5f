#pragma once

#include <memory>
#include <string>

#include "afzp/classify.hpp"
#include "json.hpp"

namespace afzp::io {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Group order p implied by a field order N in {p, p^2, 4p^2}.
int p_from_order(int order);

json to_json(const Rational& r);
Rational rational_from_json(const json& j, const std::string& path);

json to_json(const Scalar& s);
/// ctx may be null for a standalone scalar; the field is then read from "order".
Scalar scalar_from_json(const json& j, const FieldContext* ctx, const std::string& path);

json to_json(const Mat& m);
Mat mat_from_json(const json& j, const FieldContext& ctx, const std::string& path);

json to_json(const FdSystem& s);
FdSystem system_from_json(const json& j, const std::string& path = "$");

json to_json(const CanonicalForm& c);
std::shared_ptr<const CanonicalForm> canonical_from_json(const json& j, const std::string& path = "$");

json to_json(const EqHom& h);
EqHom hom_from_json(const json& j, const std::string& path = "$");

json element_to_json(const FieldContext& ctx, const Element& w);
Element element_from_json(const json& j, const std::string& path = "$");

json to_json(const CrossedPresentation& cp);
CrossedPresentation crossed_from_json(const json& j, const std::string& path = "$");

json to_json(const KInvariant& k);
KInvariant kinvariant_from_json(const json& j, const std::string& path = "$");

json to_json(const KPair& k);
KPair kpair_from_json(const json& j, const std::string& path = "$");

json to_json(const EquivResult& r, const FieldContext& ctx);
EquivResult equiv_from_json(const json& j, const std::string& path = "$");

json to_json(const Tower& t);
Tower tower_from_json(const json& j, const std::string& path = "$");

json to_json(const IntertwiningCertificate& c);
IntertwiningCertificate certificate_from_json(const json& j, const std::string& path = "$");

json to_json(const Report& r);

/// Parses JSON text; syntax errors become ParseError naming line and column.
json parse_text(const std::string& text, const std::string& source = "input");
json load_file(const std::string& path);
/// Serialized form used for every output file: two-space indent, trailing newline.
std::string dump(const json& j);
/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& text);
/// The "type" field of a document, checked against afzp_format.
std::string document_type(const json& j);

/// Same system over a larger field (N' a multiple of N).
FdSystem embed_system(const FdSystem& s, const FieldContext& target);

}  // namespace afzp::io
