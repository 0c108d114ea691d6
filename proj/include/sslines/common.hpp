/**
 * Copyright 2026 The sslines Authors
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

#ifndef SSLINES_COMMON_HPP_
#define SSLINES_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace sslines {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or otherwise invalid geometry (zero-length segments, crop
/// windows outside the image, lines outside a map).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or schema violations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shape mismatch between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Problems with input data: missing files, malformed documents, duplicate ids.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace sslines

#endif  // SSLINES_COMMON_HPP_
