#pragma once

#include <span>
#include <vector>

#include "cbdc/asset/asset.hpp"

namespace cbdc::asset {

inline bool is_cooled(const Asset& asset, Tick current_tick, Tick cooldown) {
  return current_tick >= asset.issue_tick + cooldown;
}

// Exact-sum coin selection over cooled assets, largest denomination first
// with backtracking. Candidates are ordered by (denomination desc, serial
// asc), so the result depends only on the holdings' contents. Returns indices
// into `holdings`; throws CannotMakeAmount when no exact subset exists.
std::vector<std::size_t> select_token_indices(std::span<const Asset> holdings, Amount amount,
                                              Tick current_tick, Tick cooldown);

std::vector<Asset> select_tokens(std::span<const Asset> holdings, Amount amount, Tick current_tick,
                                 Tick cooldown);

// Greedy largest-first split of an amount into the denomination set. With 1
// in the set this always succeeds.
std::vector<Amount> decompose_amount(Amount amount, std::span<const Amount> denominations);

}  // namespace cbdc::asset
