#include "cbdc/asset/selection.hpp"

#include <algorithm>

#include "cbdc/error.hpp"

namespace cbdc::asset {

namespace {

struct Group {
  Amount denomination;
  std::vector<std::size_t> members;  // indices into holdings, serial ascending
};

bool search(const std::vector<Group>& groups, std::size_t at, Amount remaining,
            std::vector<std::size_t>& counts) {
  if (remaining == 0) return true;
  if (at == groups.size()) return false;
  const Group& g = groups[at];
  Amount most = std::min<Amount>(static_cast<Amount>(g.members.size()), remaining / g.denomination);
  for (Amount c = most; c >= 0; --c) {
    counts[at] = static_cast<std::size_t>(c);
    if (search(groups, at + 1, remaining - c * g.denomination, counts)) return true;
  }
  counts[at] = 0;
  return false;
}

}  // namespace

std::vector<std::size_t> select_token_indices(std::span<const Asset> holdings, Amount amount,
                                              Tick current_tick, Tick cooldown) {
  if (amount <= 0) fail(ErrorCode::InvalidArgument, "amount must be positive");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < holdings.size(); ++i)
    if (holdings[i].denomination > 0 && is_cooled(holdings[i], current_tick, cooldown)) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (holdings[a].denomination != holdings[b].denomination)
      return holdings[a].denomination > holdings[b].denomination;
    if (holdings[a].serial != holdings[b].serial) return holdings[a].serial < holdings[b].serial;
    return a < b;
  });

  std::vector<Group> groups;
  for (std::size_t idx : order) {
    if (groups.empty() || groups.back().denomination != holdings[idx].denomination)
      groups.push_back(Group{holdings[idx].denomination, {}});
    groups.back().members.push_back(idx);
  }

  std::vector<std::size_t> counts(groups.size(), 0);
  if (!search(groups, 0, amount, counts))
    fail(ErrorCode::CannotMakeAmount, "no exact combination of spendable tokens makes " + std::to_string(amount));

  std::vector<std::size_t> picked;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t k = 0; k < counts[g]; ++k) picked.push_back(groups[g].members[k]);
  return picked;
}

std::vector<Asset> select_tokens(std::span<const Asset> holdings, Amount amount, Tick current_tick,
                                 Tick cooldown) {
  std::vector<Asset> out;
  for (std::size_t i : select_token_indices(holdings, amount, current_tick, cooldown)) out.push_back(holdings[i]);
  return out;
}

std::vector<Amount> decompose_amount(Amount amount, std::span<const Amount> denominations) {
  if (amount <= 0) fail(ErrorCode::InvalidArgument, "amount must be positive");
  std::vector<Amount> denoms(denominations.begin(), denominations.end());
  std::sort(denoms.rbegin(), denoms.rend());
  std::vector<Amount> out;
  for (Amount d : denoms) {
    if (d <= 0) continue;
    while (amount >= d) {
      out.push_back(d);
      amount -= d;
    }
  }
  if (amount != 0) fail(ErrorCode::CannotMakeAmount, "denomination set cannot represent amount");
  return out;
}

}  // namespace cbdc::asset
