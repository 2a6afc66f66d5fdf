// Copyright 2026 The polarcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POLARCAST__ERROR_HPP_
#define POLARCAST__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace polarcast
{

// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform for a tensor primitive.
class ShapeError : public Error
{
public:
  using Error::Error;
};

// A forward value became NaN or infinite.
class NumericError : public Error
{
public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error
{
public:
  using Error::Error;
};

// Well-formed data violating a domain invariant.
class ValidationError : public Error
{
public:
  using Error::Error;
};

// Invalid or mismatching configuration.
class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace polarcast

#endif  // POLARCAST__ERROR_HPP_
