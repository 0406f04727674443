// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace valuenet::uuid {

/// Random (version 4) UUID in lowercase hex, e.g.
/// "240c0091-b271-4e44-87f7-5598da5b24ad". Safe under concurrent calls.
std::string random_uuid();

/// Fresh "urn:uuid:<uuid>" identifier.
std::string urn_uuid();

}  // namespace valuenet::uuid
