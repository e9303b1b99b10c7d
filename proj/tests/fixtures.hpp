#pragma once

#include "choreo/nbody.hpp"

namespace fixtures {

// Figure-eight polished by classic Newton at 64 digits (residual ~5e-61).
inline choreo::SearchTriplet figure_eight(int digits = 64) {
    return {choreo::Real("0.347116888118926938242776920320300866247407337170783353439888692104", digits),
            choreo::Real("0.532724945388030229262027987691926270354911090188219655821613909896", digits),
            choreo::Real("6.32591398292621167758900033396704706329264990989414709217424865224", digits)};
}

// 17-digit rows of the published table of satellites with k = 65.
inline choreo::SearchTriplet row119(int digits) {
    return {choreo::Real("0.41817368353651279", digits), choreo::Real("0.54057212735770067", digits),
            choreo::Real("521.33539095545824", digits)};
}

inline choreo::SearchTriplet row120(int digits) {
    return {choreo::Real("0.26562094559259036", digits), choreo::Real("0.5209803403964781", digits),
            choreo::Real("335.48942966568876", digits)};
}

inline constexpr const char* kRow119TStar = "600.424230253006803";
inline constexpr const char* kRow120TStar = "600.424230253006829";

}  // namespace fixtures
