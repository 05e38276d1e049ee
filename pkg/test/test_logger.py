#!/usr/bin/env python3
"""
Tests for the session logger: directory layout, log lines and mirrored
artefacts.
"""

import os
import sys
import tempfile
import unittest
from pathlib import Path

from PIL import Image

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from crossover_optim.covmodels import case_scenario
from crossover_optim.designs import classify, make_oa
from logger import CrossoverLogger, create_logger


class TestCrossoverLogger(unittest.TestCase):
    """Log sessions under a temporary base directory."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.base = Path(self.tmp.name) / "logs"
        self.logger = create_logger(self.base)

    def read_log(self):
        return self.logger.get_log_file_path().read_text(encoding="utf-8")

    def test_session_layout(self):
        log_dir = self.logger.get_log_directory()
        self.assertTrue(log_dir.is_dir())
        self.assertEqual(log_dir.parent.name, "runs")
        self.assertEqual(log_dir.relative_to(self.base).parts[0].isdigit(), True)
        self.assertIn("Log Session Started", self.read_log())

    def test_lines_are_timestamped(self):
        self.logger.log("hello")
        last = self.read_log().splitlines()[-1]
        self.assertRegex(last, r"^\[\d\d:\d\d:\d\d\] hello$")

    def test_structured_entries(self):
        d = make_oa(3, 1)
        self.logger.log_command("crossover-optim.py", ["eval", "--case", 7])
        self.logger.log_scenario(case_scenario(7, 0.5, 0.5))
        self.logger.log_design(d, classify(d))
        self.logger.log_error("failed", ValueError("boom"))
        self.logger.log_success("done", "details here")
        text = self.read_log()
        self.assertIn("Command: crossover-optim.py eval --case 7", text)
        self.assertIn("rho: 0.5", text)
        self.assertIn("oa_type1_strength2_lambda: 1", text)
        self.assertIn("ERROR: failed", text)
        self.assertIn("Exception: boom", text)
        self.assertIn("SUCCESS: done", text)

    def test_preview_mirrored_to_recent(self):
        path = self.logger.save_design_preview(Image.new("L", (10, 10), 255), "p.png")
        self.assertTrue(path.is_file())
        rel = self.logger.get_log_directory().relative_to(self.base)
        self.assertTrue((self.base.parent / "recent" / rel / "p.png").is_file())

    def test_output_copy(self):
        out = Path(self.tmp.name) / "result.json"
        out.write_text("{}\n", encoding="utf-8")
        copied = self.logger.save_output_copy(out)
        self.assertEqual(copied.read_text(encoding="utf-8"), "{}\n")
        self.assertIsNone(self.logger.save_output_copy(Path(self.tmp.name) / "missing.json"))

    def test_lazy_session(self):
        logger = CrossoverLogger(self.base / "lazy", auto_create=False)
        self.assertIsNone(logger.get_log_file_path())
        logger.log("first line")
        self.assertTrue(logger.get_log_file_path().is_file())


if __name__ == '__main__':
    unittest.main(verbosity=2)
