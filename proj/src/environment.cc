// Copyright 2026 The thoughtnav Authors
// SPDX-License-Identifier: Apache-2.0
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

#include "thoughtnav/environment.h"

namespace thoughtnav {

ActionMask masked_actions(bool answer_present, int actions_taken,
                          int max_actions, ActionMask enabled) {
  if (answer_present || actions_taken >= max_actions - 1) {
    return ActionMask{ActionKind::kTerminate};
  }
  ActionMask legal = enabled;
  legal.insert(ActionKind::kReasonOneStep);
  legal.insert(ActionKind::kTerminate);
  if (actions_taken == 0) legal.erase(ActionKind::kRefine);
  return legal;
}

}  // namespace thoughtnav
