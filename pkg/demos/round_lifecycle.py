"""Walk one protocol round by hand: register, submit, validate, score,
aggregate, close — printing receipts, events, and phase transitions.

Run: python demos/round_lifecycle.py
"""
from fedchain.coordinator import Coordinator
from fedchain.flclients import make_client_id
from fedchain.ledger import GasModel, Ledger, SYSTEM_SENDER, Transaction
from fedchain.numerics import GradientVector


def show(receipt):
    print(f"  gas={receipt.gas_used:>9,}  status={receipt.status:8s} "
          f"events={[name for name, _ in receipt.events]}")


def main():
    coordinator = Coordinator(dim=2, reward_pool=1_000_000)
    ledger = Ledger(GasModel(), coordinator)

    print("== deploy ==")
    show(ledger.deploy())

    print("\n== register two clients (stake 100 each) ==")
    alice, bob = make_client_id(0), make_client_id(1)
    for cid, n in ((alice, 10), (bob, 30)):
        tx = Transaction(cid, "register", {"stake": 100, "n_samples": n},
                         ledger.next_nonce(cid))
        show(ledger.submit_tx(tx))
    ledger.seal_block()

    print("\n== round 1: submissions ==")
    updates = {alice: ["1", "0"], bob: ["0", "1"]}
    for cid, values in sorted(updates.items()):
        vector = GradientVector.from_decimals(values)
        tx = Transaction(cid, "submit_update", {
            "round": 1, "batch_index": 0, "batch_count": 1,
            "components": vector.raws(),
        }, ledger.next_nonce(cid))
        show(ledger.submit_tx(tx))

    print("\n== a duplicate submission reverts ==")
    tx = Transaction(alice, "submit_update", {
        "round": 1, "batch_index": 0, "batch_count": 1,
        "components": GradientVector.from_decimals(["9", "9"]).raws(),
    }, ledger.next_nonce(alice))
    show(ledger.submit_tx(tx))

    print("\n== system calls drive the round forward ==")
    for op in ("validate_round", "score_and_reward_round", "aggregate_round", "close_round"):
        tx = Transaction(SYSTEM_SENDER, op, {"round": 1}, ledger.next_nonce(SYSTEM_SENDER))
        receipt = ledger.submit_tx(tx)
        print(f"{op}:")
        show(receipt)
    block = ledger.seal_block()

    state = coordinator.rounds[1]
    print("\n== outcome ==")
    print("phase:", state.phase.name)
    print("scores:", {hex_id(cid): s.to_decimal() for cid, s in sorted(state.scores.items())})
    print("payouts:", {hex_id(cid): p for cid, p in sorted(state.payouts.items())})
    print("aggregate:", [c.to_decimal() for c in state.aggregate.components],
          "(sample-weighted mean: bob holds 3/4 of the data)")
    print("block", block.height, "hash:", block.block_hash().hex()[:16], "...")
    ledger.verify_chain()
    print("chain verifies.")


def hex_id(cid: bytes) -> str:
    return "0x" + cid.hex()[:8]


if __name__ == "__main__":
    main()
