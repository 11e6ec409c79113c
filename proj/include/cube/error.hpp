/*
 * cube - trivariate B-spline feature volumes for 3D surface representation.
 *
 * Copyright 2026 The cube authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace cube {

/// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A parametric point (or other argument) lies outside its valid domain.
class DomainError : public Error
{
public:
    static constexpr std::size_t no_index = std::numeric_limits<std::size_t>::max();

    explicit DomainError(const std::string& what, std::size_t index = no_index)
        : Error(what), index_(index)
    {
    }

    /// Position of the offending element in a batch call, or no_index.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class IndexError : public Error
{
public:
    using Error::Error;
};

/// Inconsistent sizes or hyperparameters.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// A structural check on a value failed; field() names what was wrong.
class ValidationError : public Error
{
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public Error
{
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error
{
public:
    using Error::Error;
};

/// Two models cannot be combined; field() names the mismatch.
class IncompatibleError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

} // namespace cube
