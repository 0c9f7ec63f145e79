"""Five honest clients and one gradient negator: watch alignment scores
expose the adversary, the negative-streak policy slash and ban it, and the
honest majority keep earning.

Run: python demos/adversaries.py
"""
from fedchain.flclients import make_client_id
from fedchain.scenario import parse_config, run_scenario

CONFIG = {
    "seed": 11,
    "rounds": 10,
    "fairness_interval": 5,
    "ban_threshold": 3,
    "slash_fraction": "0.5",
    "dataset": {
        "n_clients": 6,
        "samples_per_client": [40] * 6,
        "dim": 8,
        "noise": 0.1,
        "behaviors": ["honest"] * 5 + ["negator"],
    },
}


def main():
    config = parse_config(CONFIG)
    negator = "0x" + make_client_id(5).hex()
    print("negator id:", negator[:10], "— submits the exact negative of its "
          "honest gradient every round\n")

    result = run_scenario(config)
    print(f"{'round':>5} {'negator S':>14} {'paid to negator':>16} banned")
    for record in result.report["rounds"]:
        score = record["scores"].get(negator, "—")
        paid = record["payouts"].get(negator, 0)
        banned = negator in record["banned"]
        print(f"{record['round']:>5} {score:>14} {paid:>16} {'<- BANNED' if banned else ''}")

    stake = result.coordinator.clients[make_client_id(5)].stake
    print(f"\nnegator stake after slash: {stake} (started at {config.min_stake})")

    totals: dict[str, int] = {}
    for record in result.report["rounds"]:
        for cid, amount in record["payouts"].items():
            totals[cid] = totals.get(cid, 0) + amount
    print("total payouts:")
    for i in range(6):
        cid = "0x" + make_client_id(i).hex()
        kind = config.dataset.behaviors[i].kind
        print(f"  client {i} ({kind:8s}): {totals.get(cid, 0):>10,}")


if __name__ == "__main__":
    main()
