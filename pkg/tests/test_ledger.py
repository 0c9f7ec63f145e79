"""Gas model calibration, transaction execution, and chain integrity."""
import pytest

from fedchain.coordinator import Coordinator
from fedchain.errors import NonceError, UnknownSender
from fedchain.flclients import make_client_id
from fedchain.ledger import (
    GENESIS_PARENT,
    GasModel,
    Ledger,
    Transaction,
    gas_csv_text,
)

# Reference gas measurements by parameter size (register and distribute are
# parameter-independent; the other classes grow with size).
REFERENCE_GAS = {
    10: {"register": 45_373, "submit": 393_262, "aggregate": 499_660,
         "validate": 512_769, "distribute": 219_961},
    100: {"register": 45_373, "submit": 2_403_817, "aggregate": 3_891_311,
          "validate": 2_153_970, "distribute": 219_961},
    1_000: {"register": 45_373, "submit": 22_866_722, "aggregate": 37_893_125,
            "validate": 18_609_485, "distribute": 219_961},
    10_000: {"register": 45_373, "submit": 229_065_242, "aggregate": 386_438_410,
             "validate": 187_515_227, "distribute": 219_961},
    100_000: {"register": 45_373, "submit": 2_447_670_138, "aggregate": 4_724_606_105,
              "validate": 2_311_631_243, "distribute": 219_961},
}
SIZES = sorted(REFERENCE_GAS)
GROWING = ("submit", "aggregate", "validate")


class TestGasModel:
    def test_register_constant(self):
        model = GasModel()
        assert {model.charge("register", p) for p in SIZES} == {45_373}

    def test_distribute_constant(self):
        model = GasModel()
        assert {model.charge("distribute", p) for p in SIZES} == {219_961}

    def test_submit_at_10_within_tolerance(self):
        assert abs(GasModel().charge("submit", 10) - 393_262) / 393_262 <= 0.15

    @pytest.mark.parametrize("op_class", GROWING)
    @pytest.mark.parametrize("size", SIZES)
    def test_fitted_cells_within_15_percent(self, op_class, size):
        expected = REFERENCE_GAS[size][op_class]
        got = GasModel().charge(op_class, size)
        assert abs(got - expected) / expected <= 0.15

    @pytest.mark.parametrize("op_class", GROWING)
    def test_strictly_increasing_in_size(self, op_class):
        model = GasModel()
        charges = [model.charge(op_class, p) for p in SIZES]
        assert charges == sorted(charges) and len(set(charges)) == len(charges)

    def test_affine_exact_formula(self):
        model = GasModel()
        base, slope = model.coefficients("submit")
        assert model.charge("submit", 123) == base + slope * 123

    def test_negative_coefficients_rejected(self):
        with pytest.raises(ValueError):
            GasModel(submit_base=-1)

    def test_param_count_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            GasModel().charge("submit", -1)


def make_ledger(dim=2, **kwargs) -> tuple[Ledger, Coordinator]:
    coordinator = Coordinator(dim=dim, **kwargs)
    ledger = Ledger(GasModel(), coordinator)
    ledger.deploy()
    return ledger, coordinator


def register_tx(ledger: Ledger, client_id: bytes, stake=100, n_samples=10) -> Transaction:
    return Transaction(
        client_id, "register", {"stake": stake, "n_samples": n_samples},
        ledger.next_nonce(client_id),
    )


class TestExecution:
    def test_registration_gas_is_constant_class(self):
        ledger, _ = make_ledger()
        receipt = ledger.submit_tx(register_tx(ledger, make_client_id(0)))
        assert receipt.success
        assert receipt.gas_used == 45_373

    def test_stale_nonce_rejected(self):
        ledger, _ = make_ledger()
        client = make_client_id(0)
        ledger.submit_tx(register_tx(ledger, client))
        with pytest.raises(NonceError):
            ledger.submit_tx(Transaction(client, "submit_update", {
                "round": 1, "batch_index": 0, "batch_count": 1, "components": [0, 0],
            }, nonce=0))

    def test_unknown_sender_rejected(self):
        ledger, _ = make_ledger()
        with pytest.raises(UnknownSender):
            ledger.submit_tx(Transaction(make_client_id(9), "submit_update", {
                "round": 1, "batch_index": 0, "batch_count": 1, "components": [0, 0],
            }, nonce=0))

    def test_reverted_call_emits_no_events(self):
        ledger, _ = make_ledger()
        client = make_client_id(0)
        ledger.submit_tx(register_tx(ledger, client))
        receipt = ledger.submit_tx(register_tx(ledger, client))  # duplicate
        assert receipt.status == "reverted"
        assert receipt.revert_reason == "AlreadyRegistered"
        assert receipt.events == []
        assert receipt.gas_used > 0

    def test_deploy_cost_in_genesis_receipt(self):
        ledger, _ = make_ledger()
        genesis_receipts = ledger.block_receipts[0]
        assert len(genesis_receipts) == 1
        assert genesis_receipts[0].gas_used == 2_371_244
        assert ledger.blocks[0].height == 0
        assert ledger.blocks[0].parent_hash == GENESIS_PARENT

    def test_payload_size_deterministic(self):
        tx = Transaction(make_client_id(0), "submit_update", {
            "round": 1, "batch_index": 0, "batch_count": 1, "components": [1, -2, 3],
        }, nonce=0)
        same = Transaction(make_client_id(0), "submit_update", {
            "components": [1, -2, 3], "batch_count": 1, "batch_index": 0, "round": 1,
        }, nonce=0)
        assert tx.payload_size() == same.payload_size() > 0
        assert tx.tx_hash() == same.tx_hash()


class TestChain:
    def run_small_chain(self) -> Ledger:
        ledger, _ = make_ledger()
        for i in range(3):
            ledger.submit_tx(register_tx(ledger, make_client_id(i)))
        ledger.seal_block()
        ledger.seal_block()  # empty block allowed
        return ledger

    def test_parent_links(self):
        ledger = self.run_small_chain()
        for prev, block in zip(ledger.blocks, ledger.blocks[1:]):
            assert block.parent_hash == prev.block_hash()
        ledger.verify_chain()

    def test_empty_block(self):
        ledger = self.run_small_chain()
        assert ledger.blocks[-1].tx_hashes == ()

    def test_receipt_tamper_detected(self):
        ledger = self.run_small_chain()
        ledger.block_receipts[1][0].gas_used += 1
        with pytest.raises(Exception, match="receipts root"):
            ledger.verify_chain()

    def test_replay_is_bit_identical(self):
        hashes_a = [b.block_hash() for b in self.run_small_chain().blocks]
        hashes_b = [b.block_hash() for b in self.run_small_chain().blocks]
        assert hashes_a == hashes_b

    def test_state_root_changes_with_state(self):
        ledger, _ = make_ledger()
        root_before = ledger.state_root()
        ledger.submit_tx(register_tx(ledger, make_client_id(0)))
        assert ledger.state_root() != root_before

    def test_configurable_txs_per_block(self):
        coordinator = Coordinator(dim=2)
        ledger = Ledger(GasModel(), coordinator, txs_per_block=2)
        ledger.deploy()
        blocks_before = len(ledger.blocks)
        for i in range(4):
            ledger.submit_tx(register_tx(ledger, make_client_id(i)))
        assert len(ledger.blocks) == blocks_before + 2  # sealed every 2 txs


class TestGasCsv:
    def test_header_and_column_order(self):
        rows = {10: {c: 1 for c in ("register", "submit", "aggregate", "validate", "distribute")}}
        text = gas_csv_text(rows)
        lines = text.splitlines()
        assert lines[0] == "param_size,register,submit,aggregate,validate,distribute"
        assert lines[1] == "10,1,1,1,1,1"

    def test_rows_sorted_by_size(self):
        cells = {c: 0 for c in ("register", "submit", "aggregate", "validate", "distribute")}
        cells = {**cells, "register": 1}
        text = gas_csv_text({100: dict(cells), 10: dict(cells)})
        assert text.splitlines()[1].startswith("10,")
