// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// JSON formats for superoperators, canonical forms, weight families, q-weight specs and every
// report type. Complex numbers are [re, im] pairs, matrices are arrays of rows, and all floats
// are written with 17 significant digits.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qwl/choieffros.hpp"
#include "qwl/qweight.hpp"

namespace qwl::io {

using Json = nlohmann::ordered_json;

/// Deterministic text with 17 significant digits for every float. indent < 0 gives one line.
std::string dump(const Json& j, int indent = 2);
/// Throws ParseError with line and column on malformed text.
Json parse(const std::string& text);
/// Throws ParseError naming the path when the file cannot be read or parsed.
Json read_file(const std::string& path);
void write_file(const std::string& path, const Json& j);

Json to_json(cplx z);
Json to_json(const CMatrix& m);
Json vector_to_json(const CVector& v);
Json to_json(const SuperOperator& phi);
Json to_json(const CanonicalForm& cf);
Json to_json(const Atom& at);
Json to_json(const AtomList& f);
Json to_json(const WeightFamily& w);
Json to_json(const VectorWeight& vw);
Json to_json(const QWeightSpec& spec);

// Reports.
Json to_json(const CpResult& r);
Json to_json(const ClassResult& r);
Json to_json(const IdempotentReport& r);
Json to_json(const ChoiEffrosStructure& s);
Json to_json(const SkeletonReport& r);
Json to_json(const BoundaryRepReport& r);
Json to_json(const ThetaLimitReport& r);
Json to_json(const PurityCertificate& c);
Json to_json(const CornerCertificate& c);
Json to_json(const IndexZeroReport& r);

/// Parsers validate first and throw ParseError listing every diagnostic.
cplx complex_from_json(const Json& j);
CMatrix matrix_from_json(const Json& j);
CVector vector_from_json(const Json& j);
SuperOperator superop_from_json(const Json& j);
CanonicalForm canonical_from_json(const Json& j);
AtomList atoms_from_json(const Json& j);
/// p and units are optional; the defaults are p = qm with standard units.
WeightFamily family_from_json(const Json& j);
VectorWeight vector_weight_from_json(const Json& j);
/// psi may be a superoperator object or a canonical form.
QWeightSpec qweight_spec_from_json(const Json& j);

enum class SchemaKind { Auto, SuperOperator, CanonicalForm, WeightFamily, VectorWeight, QWeightSpec };

/// Field-level diagnostics "path: message"; empty when the document is well formed. Never throws.
std::vector<std::string> validate_schema(const Json& j, SchemaKind kind = SchemaKind::Auto);
/// Reads and validates a file; read and syntax failures become diagnostics.
std::vector<std::string> validate_schema_file(const std::string& path, SchemaKind kind = SchemaKind::Auto);

}  // namespace qwl::io
