/*
 * Copyright 2026 The dualmink Authors.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <dualmink/body.hpp>
#include <dualmink/errors.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace dualmink {

using Json = nlohmann::ordered_json;

///
/// A malformed document. `pointer` is the JSON pointer of the offending value; file
/// loaders translate it to a line number.
///
class DocumentError : public ConfigError
{
public:
    DocumentError(std::string pointer, const std::string& message)
        : ConfigError(pointer.empty() ? message : pointer + ": " + message)
        , m_pointer(std::move(pointer))
    {}
    const std::string& pointer() const { return m_pointer; }

private:
    std::string m_pointer;
};

/// 1-based line of the value at `pointer` in `text`, or 0 when not found.
std::size_t locate_line(const std::string& text, const std::string& pointer);

/// Reads a JSON document; parse errors become ConfigError naming the path and position.
Json read_json_file(const std::filesystem::path& path);

/// Writes `doc` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& doc);

///
/// Body specification:
///   {"type":"ellipsoid","half_axes":[a,b,c],"center":[x,y,z],"axes":[[...],[...],[...]]}
///   {"type":"polytope","vertices":[[x,y,z],...]}
///   {"type":"support_grid","level":L,"values":[...]}
/// "axes" rows are the principal directions. "center" and "axes" are optional.
///
ConvexBody body_from_json(const Json& doc, const BodyOptions& opts = {});
Json body_to_json(const ConvexBody& body);

/// Loads and validates a body file; every failure is a ConfigError naming path and line.
ConvexBody load_body(const std::filesystem::path& path, const BodyOptions& opts = {});

/// Field document: {"level":L,"values":[...]} (a "type" member is ignored).
ScalarField field_from_json(const Json& doc);
Json field_to_json(const ScalarField& field);
ScalarField load_field(const std::filesystem::path& path);

/// "path:line" (or just the path) for the value at `pointer` in the file.
std::string describe_location(const std::filesystem::path& path, const std::string& pointer);

/// Runs `parse` on the document at `path`, translating DocumentError pointers to lines.
template <typename Fn>
auto with_diagnostics(const std::filesystem::path& path, Fn&& parse)
{
    const Json doc = read_json_file(path);
    try {
        return parse(doc);
    } catch (const DocumentError& e) {
        throw ConfigError(describe_location(path, e.pointer()) + ": " + e.what());
    }
}

// Small typed readers shared by the config parsers.
double json_number(const Json& doc, const std::string& pointer);
Vec3 json_vec3(const Json& doc, const std::string& pointer);

} // namespace dualmink
