// SPDX-License-Identifier: Apache-2.0
//
// xlelm: extreme learning machines realized through XL-MIMO fading channels
// Copyright (C) 2026 The xlelm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace xlelm
{

// All library errors derive from Error so callers can catch one type.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Shape or size mismatch between operands.
class DimensionError : public Error
{
  public:
    using Error::Error;
};

// Non-finite or otherwise unusable numeric input.
class InputError : public Error
{
  public:
    using Error::Error;
};

// Invalid parameter or configuration value.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

// Malformed, missing or inconsistent dataset content.
class DataError : public Error
{
  public:
    using Error::Error;
};

// A table that contains a single class where two are required.
class ClassBalanceError : public DataError
{
  public:
    using DataError::DataError;
};

// Received signal power is zero, so no SNR can be calibrated against it.
class DegenerateSignalError : public Error
{
  public:
    using Error::Error;
};

// File system failure while reading or writing artifacts.
class IoError : public Error
{
  public:
    using Error::Error;
};

} // namespace xlelm
