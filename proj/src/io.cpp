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
#include <dualmink/io.hpp>

#include <fstream>
#include <iterator>
#include <sstream>

namespace dualmink {

namespace {

/// Character iterator that records how far the parser has read.
class TrackingIterator
{
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    TrackingIterator() = default;
    TrackingIterator(const char* p, const char* base, std::size_t* furthest)
        : m_p(p)
        , m_base(base)
        , m_furthest(furthest)
    {}

    reference operator*() const
    {
        *m_furthest = static_cast<std::size_t>(m_p - m_base);
        return *m_p;
    }
    TrackingIterator& operator++()
    {
        ++m_p;
        return *this;
    }
    TrackingIterator operator++(int)
    {
        auto t = *this;
        ++m_p;
        return t;
    }
    bool operator==(const TrackingIterator& o) const { return m_p == o.m_p; }
    bool operator!=(const TrackingIterator& o) const { return m_p != o.m_p; }

private:
    const char* m_p = nullptr;
    const char* m_base = nullptr;
    std::size_t* m_furthest = nullptr;
};

/// SAX consumer that stops at the value whose JSON pointer equals the target.
class PointerLocator : public nlohmann::json_sax<Json>
{
public:
    PointerLocator(std::string target, const std::size_t* offset)
        : m_target(std::move(target))
        , m_offset(offset)
    {}

    std::optional<std::size_t> found;

    bool null() override { return scalar(); }
    bool boolean(bool) override { return scalar(); }
    bool number_integer(number_integer_t) override { return scalar(); }
    bool number_unsigned(number_unsigned_t) override { return scalar(); }
    bool number_float(number_float_t, const string_t&) override { return scalar(); }
    bool string(string_t&) override { return scalar(); }
    bool binary(binary_t&) override { return scalar(); }
    bool start_object(std::size_t) override { return open(false); }
    bool end_object() override { return close(); }
    bool start_array(std::size_t) override { return open(true); }
    bool end_array() override { return close(); }
    bool key(string_t& k) override
    {
        m_stack.back().key = k;
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

private:
    struct Frame
    {
        bool array = false;
        std::size_t index = 0;
        std::string key;
    };

    std::string current_pointer()
    {
        std::string ptr;
        for (std::size_t k = 0; k < m_stack.size(); ++k) {
            auto& f = m_stack[k];
            ptr += "/";
            ptr += f.array ? std::to_string(k + 1 == m_stack.size() ? f.index : f.index - 1) : f.key;
        }
        return ptr;
    }

    bool visit()
    {
        std::string ptr = current_pointer();
        if (!m_stack.empty() && m_stack.back().array) ++m_stack.back().index;
        if (ptr == m_target) {
            found = *m_offset;
            return false;
        }
        return true;
    }

    bool scalar() { return visit(); }

    bool open(bool array)
    {
        if (!visit()) return false;
        m_stack.push_back(Frame{array, 0, {}});
        return true;
    }

    bool close()
    {
        m_stack.pop_back();
        return true;
    }

    std::string m_target;
    const std::size_t* m_offset;
    std::vector<Frame> m_stack;
};

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Json& at_pointer(const Json& doc, const std::string& pointer)
{
    const Json::json_pointer ptr(pointer);
    if (!doc.contains(ptr)) throw DocumentError(pointer, "missing required value");
    return doc.at(ptr);
}

double as_number(const Json& v, const std::string& pointer)
{
    if (!v.is_number()) throw DocumentError(pointer, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw DocumentError(pointer, "value is not finite");
    return x;
}

Vec3 as_vec3(const Json& v, const std::string& pointer)
{
    if (!v.is_array() || v.size() != 3) throw DocumentError(pointer, "expected an array of 3 numbers");
    return Vec3(as_number(v[0], pointer + "/0"), as_number(v[1], pointer + "/1"), as_number(v[2], pointer + "/2"));
}

int as_level(const Json& v, const std::string& pointer)
{
    if (!v.is_number_integer()) throw DocumentError(pointer, "expected an integer grid level");
    const auto level = v.get<long long>();
    if (level < 0 || level > SphericalGrid::kMaxLevel) {
        throw DocumentError(pointer, "grid level must be in [0, " + std::to_string(SphericalGrid::kMaxLevel) + "]");
    }
    return static_cast<int>(level);
}

std::vector<double> as_values(const Json& v, const std::string& pointer, std::size_t expected)
{
    if (!v.is_array()) throw DocumentError(pointer, "expected an array of numbers");
    if (v.size() != expected) {
        throw DocumentError(pointer, "expected " + std::to_string(expected) + " values, found " +
                                         std::to_string(v.size()));
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = as_number(v[i], pointer + "/" + std::to_string(i));
    return out;
}

Json vec_json(const Vec3& v)
{
    return Json::array({v.x(), v.y(), v.z()});
}

} // namespace

std::size_t locate_line(const std::string& text, const std::string& pointer)
{
    std::size_t offset = 0;
    PointerLocator locator(pointer, &offset);
    TrackingIterator first(text.data(), text.data(), &offset);
    TrackingIterator last(text.data() + text.size(), text.data(), &offset);
    Json::sax_parse(first, last, &locator);
    if (!locator.found) return 0;
    const std::size_t end = std::min(*locator.found, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

std::string describe_location(const std::filesystem::path& path, const std::string& pointer)
{
    std::string text;
    try {
        text = slurp(path);
    } catch (const ConfigError&) {
        return path.string();
    }
    const auto line = locate_line(text, pointer);
    return line ? path.string() + ":" + std::to_string(line) : path.string();
}

Json read_json_file(const std::filesystem::path& path)
{
    const std::string text = slurp(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1 + static_cast<std::size_t>(std::count(
                                   text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(e.byte, text.size())), '\n'));
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
}

void write_json_file(const std::filesystem::path& path, const Json& doc)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string() + ": cannot open for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw ConfigError(path.string() + ": write failed");
}

double json_number(const Json& doc, const std::string& pointer)
{
    return as_number(at_pointer(doc, pointer), pointer);
}

Vec3 json_vec3(const Json& doc, const std::string& pointer)
{
    return as_vec3(at_pointer(doc, pointer), pointer);
}

ConvexBody body_from_json(const Json& doc, const BodyOptions& opts)
{
    if (!doc.is_object()) throw DocumentError("", "body specification must be an object");
    const auto& type_v = at_pointer(doc, "/type");
    if (!type_v.is_string()) throw DocumentError("/type", "expected a string");
    const std::string type = type_v.get<std::string>();

    if (type == "ellipsoid") {
        const Vec3 half_axes = json_vec3(doc, "/half_axes");
        const Vec3 center = doc.contains("center") ? json_vec3(doc, "/center") : Vec3::Zero();
        Mat3 axes = Mat3::Identity();
        if (doc.contains("axes")) {
            const auto& a = doc["axes"];
            if (!a.is_array() || a.size() != 3) throw DocumentError("/axes", "expected a 3x3 array");
            // Rows of the document are principal directions, stored as columns.
            for (int k = 0; k < 3; ++k) axes.col(k) = as_vec3(a[k], "/axes/" + std::to_string(k));
        }
        try {
            return ConvexBody::ellipsoid(half_axes, center, axes, opts);
        } catch (const InvalidBodyError& e) {
            throw DocumentError("/half_axes", e.what());
        }
    }
    if (type == "polytope") {
        const auto& verts = at_pointer(doc, "/vertices");
        if (!verts.is_array() || verts.size() < 4) throw DocumentError("/vertices", "expected at least 4 vertices");
        std::vector<Vec3> pts;
        for (std::size_t i = 0; i < verts.size(); ++i) pts.push_back(as_vec3(verts[i], "/vertices/" + std::to_string(i)));
        try {
            return ConvexBody::polytope(pts, opts);
        } catch (const InvalidBodyError& e) {
            throw DocumentError("/vertices", e.what());
        }
    }
    if (type == "support_grid") {
        auto field = field_from_json(doc);
        for (std::size_t i = 0; i < field.size(); ++i) {
            if (!(field[i] >= opts.rho_min)) {
                throw DocumentError("/values/" + std::to_string(i), "support value below rho_min");
            }
        }
        try {
            return ConvexBody::support_grid(std::move(field), opts);
        } catch (const InvalidBodyError& e) {
            throw DocumentError("/values", e.what());
        } catch (const NumericalError& e) {
            throw DocumentError("/level", e.what());
        }
    }
    throw DocumentError("/type", "unknown body type '" + type + "'");
}

Json body_to_json(const ConvexBody& body)
{
    Json doc;
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid: {
        const auto& e = body.as_ellipsoid();
        doc["type"] = "ellipsoid";
        doc["half_axes"] = vec_json(e.half_axes);
        doc["center"] = vec_json(e.center);
        doc["axes"] = Json::array({vec_json(e.axes.col(0)), vec_json(e.axes.col(1)), vec_json(e.axes.col(2))});
        break;
    }
    case ConvexBody::Kind::Polytope: {
        doc["type"] = "polytope";
        doc["vertices"] = Json::array();
        for (const auto& v : body.as_polytope().vertices) doc["vertices"].push_back(vec_json(v));
        break;
    }
    case ConvexBody::Kind::SupportGrid: {
        doc = field_to_json(body.as_support_grid().u);
        doc["type"] = "support_grid";
        break;
    }
    }
    return doc;
}

ConvexBody load_body(const std::filesystem::path& path, const BodyOptions& opts)
{
    return with_diagnostics(path, [&](const Json& doc) { return body_from_json(doc, opts); });
}

ScalarField field_from_json(const Json& doc)
{
    if (!doc.is_object()) throw DocumentError("", "field document must be an object");
    const int level = as_level(at_pointer(doc, "/level"), "/level");
    auto grid = build_geodesic_grid(level);
    auto values = as_values(at_pointer(doc, "/values"), "/values", grid->size());
    return ScalarField(std::move(grid), std::move(values));
}

Json field_to_json(const ScalarField& field)
{
    Json doc;
    doc["type"] = "field";
    doc["level"] = field.grid().level();
    doc["values"] = Json::array();
    for (double v : field.values()) doc["values"].push_back(v);
    return doc;
}

ScalarField load_field(const std::filesystem::path& path)
{
    return with_diagnostics(path, [&](const Json& doc) { return field_from_json(doc); });
}

} // namespace dualmink
