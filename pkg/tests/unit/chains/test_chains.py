import json
import math
import tempfile
import unittest
from pathlib import Path

import numpy as np
from parameterized import parameterized

from spinlab.chains import (
    MODELS,
    PARITIES,
    TOPOLOGIES,
    ChainSpec,
    HalfChainBasis,
    build_excitation_hamiltonian,
    build_full_hamiltonian,
    build_half_chain_hamiltonian,
    build_sector_hamiltonian,
    check_hermitian,
    coerce_enum,
    sector_states,
    to_display_order,
)
from spinlab.errors import DimensionError, NotHermitianError, SpecValidationError
from tests.helpers import kron_hamiltonian, random_linear_spec, random_mirror_spec, total_excitation


class TestChainSpec(unittest.TestCase):
    def test_defaults(self) -> None:
        spec = ChainSpec(n_spins=4)
        self.assertEqual(spec.couplings, (1.0, 1.0, 1.0))
        self.assertEqual(spec.fields, (0.0, 0.0, 0.0, 0.0))
        self.assertEqual(spec.model, MODELS.XY)
        self.assertEqual(spec.topology, TOPOLOGIES.LINEAR)

    def test_model_by_name(self) -> None:
        self.assertEqual(ChainSpec(n_spins=3, model="heisenberg").model, MODELS.HEISENBERG)
        self.assertEqual(ChainSpec(n_spins=3, model=2).model, MODELS.HEISENBERG)

    def test_invalid_specs(self) -> None:
        with self.assertRaises(ValueError):
            ChainSpec(n_spins=4, couplings=(1.0, 1.0))
        with self.assertRaises(ValueError):
            ChainSpec(n_spins=3, fields=(0.0,))
        with self.assertRaises(ValueError):
            ChainSpec(n_spins=3, couplings=(1.0, math.nan))
        with self.assertRaises(ValueError):
            ChainSpec(n_spins=1)
        with self.assertRaises(ValueError):
            ChainSpec(n_spins=3, model="ising")

    def test_parallel_chains(self) -> None:
        spec = ChainSpec.parallel_chains((1.0, 2.0, 2.0))
        self.assertEqual(spec.n_spins, 5)
        self.assertEqual(spec.mediator_sites, (1, 2, 3))
        self.assertAlmostEqual(spec.collective_coupling, 3.0, places=12)
        self.assertEqual(len(spec.bonds), 6)
        with self.assertRaises(ValueError):
            ChainSpec.parallel_chains((1.0, -1.0))

    def test_file_round_trip(self) -> None:
        specs = [
            ChainSpec(n_spins=4, couplings=(1.0, 0.5, 1.0), fields=(0.0, 0.625, 0.625, 0.0)),
            ChainSpec.parallel_chains((1.0, 2.0)),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            for k, spec in enumerate(specs):
                path = Path(tmp) / f"chain{k}.json"
                path.write_text(json.dumps(spec.to_file_dict()))
                self.assertEqual(ChainSpec.from_file(path), spec)

    def test_file_topology_object(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "network.json"
            path.write_text(json.dumps({"topology": {"parallel_chains": [1, 2, 2]}}))
            spec = ChainSpec.from_file(path)
        self.assertEqual(spec.topology, TOPOLOGIES.PARALLEL_CHAINS)
        self.assertEqual(spec.branch_couplings, (1.0, 2.0, 2.0))

    def test_malformed_file(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.json"
            path.write_text("{not json")
            with self.assertRaises(SpecValidationError):
                ChainSpec.from_file(path)
            with self.assertRaises(SpecValidationError):
                ChainSpec.from_file(Path(tmp) / "missing.json")

    def test_mirror_symmetry(self) -> None:
        self.assertTrue(ChainSpec(n_spins=5, couplings=(1.0, 2.0, 2.0, 1.0)).is_mirror_symmetric())
        self.assertFalse(ChainSpec(n_spins=5, couplings=(1.0, 2.0, 2.0, 1.5)).is_mirror_symmetric())
        self.assertFalse(ChainSpec(n_spins=3, fields=(0.1, 0.0, 0.0)).is_mirror_symmetric())


class TestHamiltonians(unittest.TestCase):
    def test_three_spin_single_excitation(self) -> None:
        h = build_excitation_hamiltonian(ChainSpec.three_spin(1.0, 0.5))
        expected = np.array([[0, 1, 0], [1, 0, 0.5], [0, 0.5, 0]])
        np.testing.assert_allclose(h, expected, atol=1e-14)

    def test_matches_kronecker_construction(self) -> None:
        # 200 random chains, both models, up to 10 spins
        rng = np.random.RandomState(7)
        for k in range(200):
            n = 2 + k % 7 if k < 190 else rng.randint(9, 11)
            model = MODELS.XY if k % 2 == 0 else MODELS.HEISENBERG
            spec = random_linear_spec(rng, n, model)
            h = build_full_hamiltonian(spec)
            np.testing.assert_allclose(h, kron_hamiltonian(spec), atol=1e-12)
            self.assertLessEqual(np.max(np.abs(h - h.conj().T)), 1e-12)
            excitations = total_excitation(n)
            self.assertLessEqual(np.max(np.abs(h @ excitations - excitations @ h)), 1e-12)

    def test_network_matches_kronecker_construction(self) -> None:
        spec = ChainSpec.parallel_chains((1.0, 2.0, 2.0))
        np.testing.assert_allclose(build_full_hamiltonian(spec), kron_hamiltonian(spec), atol=1e-12)

    @parameterized.expand([(3, 1), (4, 2), (5, 2), (6, 3)])
    def test_sector_block(self, n: int, k: int) -> None:
        spec = random_linear_spec(np.random.RandomState(n + k), n, MODELS.HEISENBERG)
        states = sector_states(n, k)
        self.assertEqual(len(states), math.comb(n, k))
        full = build_full_hamiltonian(spec)
        np.testing.assert_allclose(build_sector_hamiltonian(spec, k), full[np.ix_(states, states)], atol=1e-12)

    def test_sector_order(self) -> None:
        # excitation on site 0 first, i.e. |100> before |010> before |001>
        self.assertEqual(sector_states(3, 1), [4, 2, 1])
        with self.assertRaises(SpecValidationError):
            sector_states(3, 4)

    def test_size_guard(self) -> None:
        with self.assertRaises(DimensionError):
            build_full_hamiltonian(ChainSpec(n_spins=6), max_spins=5)

    def test_excitation_block_needs_linear_chain(self) -> None:
        with self.assertRaises(SpecValidationError):
            build_excitation_hamiltonian(ChainSpec.parallel_chains((1.0, 1.0)))

    def test_check_hermitian(self) -> None:
        with self.assertRaises(NotHermitianError):
            check_hermitian(np.array([[0, 1], [0, 0]]))
        with self.assertRaises(DimensionError):
            check_hermitian(np.zeros((2, 3)))


class TestHalfChain(unittest.TestCase):
    def test_basis(self) -> None:
        basis = HalfChainBasis.for_spins(5)
        self.assertEqual(basis.parity, PARITIES.ODD)
        self.assertEqual(basis.n, 3)
        p = basis.isometry()
        np.testing.assert_allclose(p.T @ p, np.eye(3), atol=1e-15)
        self.assertEqual(len(basis.labels()), 3)
        with self.assertRaises(ValueError):
            HalfChainBasis(n_spins=4, parity="odd")

    def test_column_order(self) -> None:
        s = 1 / math.sqrt(2)
        # |1~> is the end pair, the last state sits in the middle
        np.testing.assert_allclose(
            HalfChainBasis.for_spins(5).isometry(),
            [[s, 0, 0], [0, s, 0], [0, 0, 1], [0, s, 0], [s, 0, 0]],
            atol=1e-15,
        )
        np.testing.assert_allclose(HalfChainBasis.for_spins(4).isometry(), [[s, 0], [0, s], [0, s], [s, 0]], atol=1e-15)
        labels = HalfChainBasis.for_spins(5).labels()
        self.assertEqual(labels[0], "|1~> = (|10000> + |00001>)/sqrt(2)")
        self.assertEqual(labels[-1], "|3~> = |00100>")

    def test_odd_homogeneous(self) -> None:
        h = build_half_chain_hamiltonian(ChainSpec.homogeneous(5))
        s = math.sqrt(2)
        np.testing.assert_allclose(h, [[0, 1, 0], [1, 0, s], [0, s, 0]], atol=1e-14)

    def test_even_homogeneous(self) -> None:
        h = build_half_chain_hamiltonian(ChainSpec.homogeneous(4))
        np.testing.assert_allclose(h, [[0, 1], [1, 1]], atol=1e-14)

    def test_even_compensated(self) -> None:
        # -omega/2 on the middle pair leaves a uniform diagonal
        h = build_half_chain_hamiltonian(ChainSpec.homogeneous(4, fields=(0.0, -0.5, -0.5, 0.0)))
        np.testing.assert_allclose(h, [[1, 1], [1, 1]], atol=1e-14)

    @parameterized.expand([(3,), (4,), (7,), (8,)])
    def test_invariant_under_full_dynamics(self, n: int) -> None:
        spec = random_mirror_spec(np.random.RandomState(n), n)
        p = HalfChainBasis.for_spins(n).isometry()
        h_exc = build_excitation_hamiltonian(spec)
        h_half = build_half_chain_hamiltonian(spec)
        np.testing.assert_allclose(h_exc @ p, p @ h_half, atol=1e-12)

    def test_rejects_asymmetric_chain(self) -> None:
        with self.assertRaises(SpecValidationError):
            build_half_chain_hamiltonian(ChainSpec(n_spins=4, couplings=(1.0, 1.0, 2.0)))


class TestDisplayOrder(unittest.TestCase):
    def test_permutation(self) -> None:
        m = np.arange(64).reshape(8, 8)
        d = to_display_order(m)
        self.assertEqual(d[2, 3], m[4, 5])
        self.assertEqual(d[4, 0], m[2, 0])
        with self.assertRaises(DimensionError):
            to_display_order(np.eye(4))

    def test_coerce_enum(self) -> None:
        self.assertEqual(coerce_enum(MODELS, "xy"), MODELS.XY)
        self.assertEqual(coerce_enum(TOPOLOGIES, "parallel-chains"), TOPOLOGIES.PARALLEL_CHAINS)
        with self.assertRaises(ValueError):
            coerce_enum(MODELS, 7)


if __name__ == "__main__":
    unittest.main()
