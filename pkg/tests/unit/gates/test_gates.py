import math
import unittest

import numpy as np

from spinlab.chains import ChainSpec, build_full_hamiltonian, to_display_order
from spinlab.errors import LeakageTooLargeError, SpecValidationError
from spinlab.evolve import unitary_at
from spinlab.gates import (
    EFFECTIVE_GATE,
    SWAP,
    chain_gate,
    check_invariant_subspace,
    compare_gates,
    extract_effective_gate,
    is_unitary,
    sector_indices,
)

TAU = math.pi / math.sqrt(2)

# mediator |1> block in the order |010>, |011>, |110>, |111>
MEDIATOR_ONE_BLOCK = np.array(
    [
        [-1, 0, 0, 0],
        [0, 0, -1, 0],
        [0, -1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)


class TestThreeSpinGate(unittest.TestCase):
    def test_full_matrix_in_display_order(self) -> None:
        u = unitary_at(build_full_hamiltonian(ChainSpec.three_spin()), TAU)
        expected = np.zeros((8, 8), dtype=complex)
        expected[:4, :4] = EFFECTIVE_GATE
        expected[4:, 4:] = MEDIATOR_ONE_BLOCK
        self.assertLessEqual(np.max(np.abs(to_display_order(u) - expected)), 1e-10)

    def test_effective_gate(self) -> None:
        _, report = chain_gate(ChainSpec.three_spin(), TAU)
        self.assertTrue(report.invariant)
        self.assertLessEqual(report.leakage, 1e-10)
        self.assertLessEqual(report.decomposition_residual, 1e-10)
        self.assertAlmostEqual(abs(report.global_phase - 1), 0.0, delta=1e-10)
        np.testing.assert_allclose(report.effective_gate, EFFECTIVE_GATE, atol=1e-10)
        self.assertEqual(report.time, TAU)

    def test_effective_gate_scales_with_omega(self) -> None:
        omega = 2.5
        _, report = chain_gate(ChainSpec.three_spin(omega), TAU / omega)
        self.assertLessEqual(report.decomposition_residual, 1e-10)

    def test_mediator_one_sector(self) -> None:
        _, report = chain_gate(ChainSpec.three_spin(), TAU, mediator_state="1", target=None)
        self.assertTrue(report.invariant)
        np.testing.assert_allclose(report.effective_gate, MEDIATOR_ONE_BLOCK, atol=1e-10)
        self.assertTrue(math.isnan(report.decomposition_residual))

    def test_leaking_sector(self) -> None:
        spec = ChainSpec.three_spin(1.0, 0.5)
        with self.assertRaises(LeakageTooLargeError) as ctx:
            chain_gate(spec, TAU)
        self.assertGreater(ctx.exception.leakage, 1e-3)
        _, report = chain_gate(spec, TAU, strict=False)
        self.assertFalse(report.invariant)
        self.assertGreater(report.leakage, 1e-3)

    def test_half_time_is_not_the_gate(self) -> None:
        _, report = chain_gate(ChainSpec.three_spin(), TAU / 2, strict=False)
        self.assertFalse(report.invariant)

    def test_report_serializes(self) -> None:
        _, report = chain_gate(ChainSpec.three_spin(), TAU)
        data = report.model_dump(mode="json")
        self.assertEqual(len(data["effective_gate"]), 4)
        self.assertEqual(len(data["effective_gate"][0][0]), 2)
        self.assertEqual(len(data["global_phase"]), 2)


class TestHelpers(unittest.TestCase):
    def test_sector_indices(self) -> None:
        self.assertEqual(sector_indices(3, (1,), "0"), [0, 1, 4, 5])
        self.assertEqual(sector_indices(3, (1,), "1"), [2, 3, 6, 7])
        self.assertEqual(sector_indices(4, (1, 2), "00"), [0, 1, 8, 9])
        with self.assertRaises(SpecValidationError):
            sector_indices(3, (1,), "00")
        with self.assertRaises(SpecValidationError):
            sector_indices(3, (3,), "0")

    def test_invariant_subspace(self) -> None:
        self.assertEqual(check_invariant_subspace(np.eye(8), (1,), "0"), 0.0)
        # a swap of spins 1 and 2 moves the mediator
        swap12 = np.kron(SWAP, np.eye(2))
        self.assertAlmostEqual(check_invariant_subspace(swap12, (1,), "0"), 1.0, places=12)

    def test_compare_gates_global_phase(self) -> None:
        residual, phase = compare_gates(1j * SWAP, SWAP)
        self.assertAlmostEqual(residual, 0.0, places=12)
        self.assertAlmostEqual(phase, 1j, places=12)
        residual, _ = compare_gates(EFFECTIVE_GATE, SWAP)
        self.assertGreater(residual, 1.0)
        with self.assertRaises(SpecValidationError):
            compare_gates(np.ones((4, 4)), SWAP)

    def test_is_unitary(self) -> None:
        self.assertTrue(is_unitary(EFFECTIVE_GATE))
        self.assertFalse(is_unitary(np.ones((2, 2))))
        self.assertFalse(is_unitary(np.ones((2, 3))))

    def test_extract_from_external_unitary(self) -> None:
        u = np.kron(np.eye(2), np.eye(4))
        report = extract_effective_gate(u, target=np.eye(4))
        self.assertLessEqual(report.decomposition_residual, 1e-12)
        self.assertEqual(report.excitation_residuals, {0: 0.0, 1: 0.0, 2: 0.0})


if __name__ == "__main__":
    unittest.main()
