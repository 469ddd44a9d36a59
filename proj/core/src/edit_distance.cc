// Copyright 2026 The catdesk Authors.
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

#include "catdesk/decode.h"

namespace catdesk {

// Instantiated once here so the common token types are compiled in the core
// library.
template EditStats edit_distance<std::string>(std::span<const std::string>, std::span<const std::string>);
template EditStats edit_distance<Label>(std::span<const Label>, std::span<const Label>);

}  // namespace catdesk
