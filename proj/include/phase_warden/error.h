// Copyright 2026 The Phase Warden Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PHASE_WARDEN_ERROR_H_
#define PHASE_WARDEN_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace phase_warden {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid pipeline spec. `location()` names the
// offending element, e.g. "phases[1].deny[0]".
class SpecError : public Error {
 public:
  SpecError(std::string location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message),
        location_(std::move(location)) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

// Project root (or another input directory) missing or unusable.
class ProjectError : public Error {
 public:
  using Error::Error;
};

// A monitoring backend cannot run on this host.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// Another monitored run holds the project lock.
class LockContention : public Error {
 public:
  using Error::Error;
};

// Enforcement requested from a process that bypasses permission bits.
class PrivilegeError : public Error {
 public:
  using Error::Error;
};

// Applying or restoring a permission mask failed.
class MaskError : public Error {
 public:
  using Error::Error;
};

// A run report was produced under a different spec than the one checked.
class StaleReportError : public Error {
 public:
  using Error::Error;
};

// Failure to launch or supervise a phase command.
class RunError : public Error {
 public:
  using Error::Error;
};

}  // namespace phase_warden

#endif  // PHASE_WARDEN_ERROR_H_
