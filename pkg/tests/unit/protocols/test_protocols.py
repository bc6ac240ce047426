import math
import unittest

import numpy as np
from parameterized import parameterized

from spinlab.chains import ChainSpec
from spinlab.errors import LeakageTooLargeError, PremiseViolationError
from spinlab.gates import EFFECTIVE_GATE
from spinlab.protocols import (
    APPENDIX_GATES,
    EBIT_MODES,
    PHI_PLUS,
    PLUS,
    TRANSFER_MODES,
    NetworkSpec,
    QubitState,
    collective_chain_amplitudes,
    network_single_excitation,
    run_appendix_gates,
    run_classical_exchange,
    run_ebit_generation,
    run_network_gate,
    run_state_transfer,
    run_w_state,
    sample_exchange,
    w_state_time,
)

SPEC = ChainSpec.three_spin()


class TestStateTransfer(unittest.TestCase):
    @parameterized.expand([(mode,) for mode in TRANSFER_MODES])
    def test_modes(self, mode: TRANSFER_MODES) -> None:
        qubit = QubitState.from_bloch(1.1, 0.4)
        result = run_state_transfer(SPEC, qubit, mode)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)
        self.assertGreaterEqual(result.mediator_purity, 1 - 1e-10)
        self.assertAlmostEqual(result.metrics["signed_overlap"], 1.0, delta=1e-10)
        self.assertAlmostEqual(result.elapsed_time, math.pi / math.sqrt(2), places=12)

    def test_z_correction_in_transcript(self) -> None:
        result = run_state_transfer(SPEC, PLUS, "med0_tgt0_with_zcorrection")
        self.assertEqual(len(result.transcript), 3)
        self.assertIn("sigma_z", result.render_transcript())
        self.assertEqual(len(run_state_transfer(SPEC, PLUS, "med0_tgt1").transcript), 2)

    def test_entangled_input(self) -> None:
        result = run_state_transfer(SPEC, mode=TRANSFER_MODES.MED0_TGT1, ancilla_pair=PHI_PLUS)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)
        self.assertAlmostEqual(result.metrics["ancilla_entropy"], 1.0, delta=1e-10)
        self.assertEqual(result.final_state.n_spins, 4)

    def test_premise(self) -> None:
        with self.assertRaises(PremiseViolationError):
            run_state_transfer(ChainSpec.three_spin(1.0, 0.5))
        with self.assertRaises(PremiseViolationError):
            run_state_transfer(ChainSpec.homogeneous(4))
        with self.assertRaises(PremiseViolationError):
            run_state_transfer(ChainSpec(n_spins=3, fields=(0.0, 0.1, 0.0)))

    def test_qubit_normalization(self) -> None:
        with self.assertRaises(ValueError):
            QubitState(alpha=1, beta=1)


class TestExchange(unittest.TestCase):
    @parameterized.expand([(a, b, m) for a in (0, 1) for b in (0, 1) for m in (0, 1)])
    def test_bits_swap(self, a: int, b: int, m: int) -> None:
        self.assertEqual(run_classical_exchange(SPEC, a, b, m), (b, a))

    def test_sampling(self) -> None:
        counts = sample_exchange(SPEC, 1, 0, shots=50, seed=3)
        self.assertEqual(counts, {(0, 1): 50})


class TestEbits(unittest.TestCase):
    @parameterized.expand([(EBIT_MODES.PLUS_PLUS_FULL_TAU,), (EBIT_MODES.HALF_TAU,)])
    def test_single_ebit(self, mode: EBIT_MODES) -> None:
        result = run_ebit_generation(SPEC, mode)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)
        self.assertGreaterEqual(result.mediator_purity, 1 - 1e-10)
        self.assertAlmostEqual(result.metrics["ebits"], 1.0, delta=1e-9)

    def test_repeated(self) -> None:
        results = run_ebit_generation(SPEC, "repeated", rounds=5)
        self.assertEqual(len(results), 5)
        for k, result in enumerate(results, start=1):
            self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)
            self.assertGreaterEqual(result.mediator_purity, 1 - 1e-10)
            # the mediator ends in |1> after odd rounds and |0> after even ones
            excited = result.mediator_state[1, 1].real
            self.assertAlmostEqual(excited, 1.0 if k % 2 else 0.0, delta=1e-10)
        self.assertAlmostEqual(results[-1].elapsed_time, 5 * math.pi / (2 * math.sqrt(2)), places=10)

    def test_two_ebit_sharing(self) -> None:
        result = run_ebit_generation(SPEC, EBIT_MODES.TWO_EBIT_SHARING)
        self.assertAlmostEqual(result.metrics["ebits"], 2.0, delta=1e-9)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-9)
        self.assertGreaterEqual(result.mediator_purity, 1 - 1e-10)


class TestWStateAndAppendixGates(unittest.TestCase):
    def test_w_state(self) -> None:
        result = run_w_state(SPEC)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)
        self.assertLessEqual(result.metrics["closed_form_deviation"], 1e-12)
        self.assertAlmostEqual(result.elapsed_time, math.atan(math.sqrt(2)) / math.sqrt(2), places=12)

    def test_w_state_time_scales(self) -> None:
        self.assertAlmostEqual(w_state_time(2.0), w_state_time(1.0) / 2, places=14)

    def test_entangle_12(self) -> None:
        result = run_appendix_gates(SPEC, APPENDIX_GATES.ENTANGLE_12)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)
        self.assertLessEqual(result.metrics["spin3_entropy"], 1e-8)

    def test_mediator_sigma_z(self) -> None:
        qubit = QubitState.from_bloch(0.7, 1.3)
        result = run_appendix_gates(SPEC, "mediator_sigma_z", qubit)
        self.assertGreaterEqual(result.figure_of_merit, 1 - 1e-10)

    def test_json_record(self) -> None:
        data = run_w_state(SPEC).model_dump(mode="json")
        self.assertEqual(data["final_state"]["basis"], "full")
        self.assertEqual(len(data["final_state"]["amplitudes"]), 8)
        self.assertEqual(len(data["mediator_state"]), 2)


class TestNetwork(unittest.TestCase):
    def test_single_branch(self) -> None:
        report = run_network_gate(NetworkSpec(branch_couplings=(1.3,)))
        self.assertTrue(report.invariant)
        self.assertLessEqual(report.decomposition_residual, 1e-10)
        np.testing.assert_allclose(report.global_phase * EFFECTIVE_GATE, report.effective_gate, atol=1e-10)

    def test_three_branches(self) -> None:
        net = NetworkSpec(branch_couplings=(1.0, 2.0, 2.0))
        self.assertAlmostEqual(net.collective_coupling, 3.0, places=12)
        self.assertAlmostEqual(net.gate_time, math.pi / (3 * math.sqrt(2)), places=12)
        report = run_network_gate(net)
        # zero and one data excitation follow the collective three-spin chain exactly
        self.assertLessEqual(report.excitation_residuals[0], 1e-10)
        self.assertLessEqual(report.excitation_residuals[1], 1e-10)
        # |11> populates two-excitation mediator states
        self.assertFalse(report.invariant)
        self.assertGreater(report.leakage, 1e-3)
        with self.assertRaises(LeakageTooLargeError):
            run_network_gate(net, strict=True)

    def test_collective_reduction(self) -> None:
        net = NetworkSpec(branch_couplings=(0.4, 1.1, 0.9, 2.0))
        for t in (0.3, 1.7, 4.2):
            np.testing.assert_allclose(network_single_excitation(net, t), collective_chain_amplitudes(net, t), atol=1e-10)

    def test_collective_modes(self) -> None:
        vacuum, excited = NetworkSpec(branch_couplings=(3.0, 4.0)).collective_modes()
        self.assertEqual(vacuum[0], 1.0)
        np.testing.assert_allclose(excited, [0, 0.8, 0.6, 0], atol=1e-15)

    def test_invalid_network(self) -> None:
        with self.assertRaises(ValueError):
            NetworkSpec(branch_couplings=())
        with self.assertRaises(ValueError):
            NetworkSpec(branch_couplings=(1.0, 0.0))


if __name__ == "__main__":
    unittest.main()
