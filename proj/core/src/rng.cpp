/*
 Copyright 2026

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "rvd/rng.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "rvd/errors.hpp"

namespace rvd {

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_;
    out << ' ' << (has_spare_ ? 1 : 0);
    if (has_spare_) {
        // hex float keeps the cached Box-Muller deviate bit-exact
        char buf[40];
        std::snprintf(buf, sizeof(buf), " %a", spare_);
        out << buf;
    }
    return out.str();
}

Rng Rng::deserialize(const std::string& text) {
    Rng rng;
    std::istringstream in(text);
    in >> rng.engine_;
    int has_spare = 0;
    in >> has_spare;
    if (in.fail()) {
        throw LoadError("rng state: malformed engine serialization");
    }
    rng.has_spare_ = (has_spare != 0);
    if (rng.has_spare_) {
        std::string tok;
        in >> tok;
        if (tok.empty()) {
            throw LoadError("rng state: missing cached deviate");
        }
        rng.spare_ = std::strtod(tok.c_str(), nullptr);
    }
    return rng;
}

}  // namespace rvd
