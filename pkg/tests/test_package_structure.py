"""
Package structure: imports resolve through the package and no module
touches sys.path itself.
"""

import os
import unittest

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class TestPackageStructure(unittest.TestCase):

    def test_entry_point_importable(self):
        from modules.cli import main
        self.assertTrue(callable(main))

    def test_version(self):
        import modules
        self.assertRegex(modules.__version__, r"^\d+\.\d+\.\d+$")

    def test_inventory_resource_ships_with_package(self):
        import config
        self.assertTrue(os.path.exists(config.RELATION_INVENTORY_PATH))

    def test_no_sys_path_manipulation_in_modules(self):
        modules_dir = os.path.join(PROJECT_ROOT, "modules")
        for name in sorted(os.listdir(modules_dir)):
            if not name.endswith(".py"):
                continue
            with open(os.path.join(modules_dir, name), "r", encoding="utf-8") as f:
                content = f.read()
            self.assertNotIn("sys.path.append", content, name)
            self.assertNotIn("sys.path.insert", content, name)
