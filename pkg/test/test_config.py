#!/usr/bin/env python3
"""
Tests for configuration loading, tolerances, thread limits and grids.
"""

import json
import os
import sys
import tempfile
import unittest
from unittest import mock

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from crossover_optim import config as cfg
from crossover_optim.errors import InvalidInputError


class TestLoadConfig(unittest.TestCase):
    """JSON configuration merged over the defaults."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, data, name="config.json"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(data if isinstance(data, str) else json.dumps(data))
        return path

    def test_shipped_config_matches_defaults(self):
        config = cfg.load_config(os.path.join(ROOT, cfg.CONFIG_FILE))
        self.assertEqual(config, cfg.DEFAULTS)

    def test_override(self):
        config = cfg.load_config(self.write({"eq_tol": 1e-6, "threads": 3}))
        self.assertEqual(config["eq_tol"], 1e-6)
        self.assertEqual(config["threads"], 3)
        self.assertEqual(config["r_grid"], cfg.DEFAULTS["r_grid"])

    def test_unknown_key(self):
        with self.assertRaises(InvalidInputError) as ctx:
            cfg.load_config(self.write({"font_path": "x"}))
        self.assertIn("font_path", str(ctx.exception))

    def test_bad_json_and_missing_file(self):
        with self.assertRaises(InvalidInputError):
            cfg.load_config(self.write("{oops"))
        with self.assertRaises(InvalidInputError):
            cfg.load_config(os.path.join(self.tmp.name, "absent.json"))
        with self.assertRaises(InvalidInputError):
            cfg.load_config(self.write("[1, 2]"))

    def test_missing_default_file_gives_defaults(self):
        cwd = os.getcwd()
        os.chdir(self.tmp.name)
        try:
            self.assertEqual(cfg.load_config(), cfg.DEFAULTS)
            with self.assertRaises(InvalidInputError):
                cfg.load_config(require_full_config=True)
        finally:
            os.chdir(cwd)

    def test_tolerance(self):
        tol = cfg.get_tolerance(dict(cfg.DEFAULTS, eq_tol=1e-6))
        self.assertEqual(tol.eq_tol, 1e-6)
        self.assertEqual(tol.rank_tol, 1e-10)
        with self.assertRaises(InvalidInputError):
            cfg.get_tolerance(dict(cfg.DEFAULTS, rank_tol=2.0))

    def test_integer_settings_validated(self):
        for key in cfg.INTEGER_KEYS:
            for bad in ("many", 0, 2.5, True):
                with self.assertRaises(InvalidInputError) as ctx:
                    cfg.load_config(self.write({key: bad}))
                self.assertIn(key, str(ctx.exception))


class TestThreadLimit(unittest.TestCase):

    def test_configured_value(self):
        with mock.patch.dict(os.environ, {}, clear=False):
            os.environ.pop(cfg.THREADS_ENV, None)
            self.assertEqual(cfg.get_thread_limit({"threads": 4}), 4)
            self.assertEqual(cfg.get_thread_limit({"threads": 0}), 1)

    def test_environment_caps(self):
        with mock.patch.dict(os.environ, {cfg.THREADS_ENV: "2"}):
            self.assertEqual(cfg.get_thread_limit({"threads": 8}), 2)
            self.assertEqual(cfg.get_thread_limit({"threads": 1}), 1)
        with mock.patch.dict(os.environ, {cfg.THREADS_ENV: "many"}):
            with self.assertRaises(InvalidInputError):
                cfg.get_thread_limit({"threads": 2})

    def test_non_integer_threads(self):
        with self.assertRaises(InvalidInputError):
            cfg.get_thread_limit({"threads": "many"})
        with self.assertRaises(InvalidInputError):
            cfg.get_thread_limit({"threads": None})


class TestGrids(unittest.TestCase):

    def test_default_r_grid(self):
        grid = cfg.parse_grid("0.05:0.95:0.05")
        self.assertEqual(len(grid), 19)
        self.assertEqual(grid[0], 0.05)
        self.assertEqual(grid[-1], 0.95)
        self.assertEqual(grid[9], 0.5)

    def test_single_point(self):
        self.assertEqual(cfg.parse_grid("0.5:0.5:0.1"), [0.5])

    def test_invalid_grids(self):
        for text in ("0:1:0.1", "0.1:0.9", "0.1:0.9:0", "0.9:0.1:0.1", "a:b:c", "0.5:1.0:0.25"):
            with self.assertRaises(InvalidInputError):
                cfg.parse_grid(text)

    def test_default_rho_grid(self):
        grid = cfg.default_rho_grid()
        self.assertEqual(len(grid), 42)
        self.assertEqual(grid[0], -0.99)
        self.assertEqual(grid[-1], 0.99)
        self.assertIn(0.01, grid)
        self.assertIn(-0.5, grid)
        self.assertNotIn(0.0, grid)
        self.assertEqual(grid, sorted(-v for v in grid))

    def test_configured_rho_grid_mirrored(self):
        grid = cfg.get_rho_grid(dict(cfg.DEFAULTS, rho_grid="0.25:0.75:0.25"))
        self.assertEqual(grid, [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75])

    def test_endpoints_added(self):
        grid = cfg.with_endpoints(cfg.parse_grid("0.05:0.95:0.05"))
        self.assertEqual(len(grid), 21)
        self.assertEqual(grid[0], 0.01)
        self.assertEqual(grid[-1], 0.99)
        self.assertEqual(cfg.with_endpoints([0.01, 0.5]), [0.01, 0.5, 0.99])


if __name__ == '__main__':
    unittest.main(verbosity=2)
