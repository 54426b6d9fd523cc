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

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace dualmink {

/// Bad user-supplied configuration: out-of-range level, malformed file, bad flag.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A body that violates a representation invariant (O not interior, non-convex field, ...).
class InvalidBodyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical failure tied (optionally) to a grid node.
class NumericalError : public std::runtime_error {
public:
    static constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

    explicit NumericalError(const std::string& what, std::size_t node = kNoNode)
        : std::runtime_error(node == kNoNode ? what : what + " (node " + std::to_string(node) + ")")
        , m_node(node)
    {}

    std::size_t node() const { return m_node; }

private:
    std::size_t m_node;
};

/// Loss of positivity / convexity that the caller cannot recover from.
class DegeneracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Non-unique answer at a non-smooth point (e.g. a polytope queried at a facet normal).
class AmbiguityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dualmink
