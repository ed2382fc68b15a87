#pragma once

#include <string>

#include "waistlab/body.hpp"

namespace waistlab {

/// Parse a body description document (JSON text, schema in docs/formats.md).
ConvexBody parse_body(const std::string& json_text);

/// Canonical serialized form; parse_body(serialize_body(b)) round-trips the
/// numeric payload bit-exactly.
std::string serialize_body(const ConvexBody& body);

/// Resolve a CLI body argument: builtin spec (cubeN, ballN(r), boxN(a,b,...),
/// simplexN) or a path to a description file.
ConvexBody resolve_body(const std::string& spec);

}  // namespace waistlab
