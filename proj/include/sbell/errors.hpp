// Copyright 2026 The subset-bell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sbell {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

#define SBELL_DEFINE_ERROR(Name)             \
    class Name : public Error {              \
       public:                               \
        using Error::Error;                  \
    }

/// A numeric argument lies outside its documented domain.
SBELL_DEFINE_ERROR(DomainError);
/// A behavior lacks probabilities for a context the inequality needs.
SBELL_DEFINE_ERROR(MissingContextError);
/// A probability table is not normalized or has negative entries.
SBELL_DEFINE_ERROR(InvalidBehaviorError);
SBELL_DEFINE_ERROR(UnknownContextError);
SBELL_DEFINE_ERROR(DuplicateContextError);
SBELL_DEFINE_ERROR(EmptyInputError);
/// The quantum value does not exceed the local bound.
SBELL_DEFINE_ERROR(NoViolationError);
/// A requested target cannot be met even at the best parameter value.
SBELL_DEFINE_ERROR(InfeasibleError);
SBELL_DEFINE_ERROR(IncompleteTableError);
SBELL_DEFINE_ERROR(NotFoundError);
SBELL_DEFINE_ERROR(TooLargeError);
SBELL_DEFINE_ERROR(DegenerateGraphError);
SBELL_DEFINE_ERROR(InvalidContextError);
SBELL_DEFINE_ERROR(MissingProbabilityError);
SBELL_DEFINE_ERROR(InconsistentRowsError);
SBELL_DEFINE_ERROR(InvalidOutcomeError);
/// Catalog file is malformed or violates an entry invariant.
SBELL_DEFINE_ERROR(CatalogError);

#undef SBELL_DEFINE_ERROR

}  // namespace sbell
