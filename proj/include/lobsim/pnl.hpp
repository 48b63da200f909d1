#pragma once

namespace lobsim {

/// Percentage PnL of a liquidation against the arrival mid:
///   100 * (cash + inventory * final_mid - initial_btc * arrival_mid) / (initial_btc * arrival_mid)
inline double pnl_percent(double cash, double inventory, double final_mid, double arrival_mid,
                          double initial_btc) noexcept {
    const double notional = initial_btc * arrival_mid;
    return 100.0 * (cash + inventory * final_mid - notional) / notional;
}

}  // namespace lobsim
