"""
Tests for the command-line driver
=================================

"""

import contextlib
import io
import os
import shutil
import tempfile
import unittest

from mtemsim.main import build_parser, get_flags, main


class MainTest(unittest.TestCase):

    """Tests the exit status of the command-line driver"""

    def setUp(self):
        self.work_dir = tempfile.mkdtemp()
        self.out = os.path.join(self.work_dir, 'out')

    def tearDown(self):
        shutil.rmtree(self.work_dir)

    def assert_exit(self, argv, code):

        """Asserts the driver terminates with the given status"""

        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as cm:
                main(argv)
        self.assertEqual(cm.exception.code, code)

    def test_flags(self):

        """Tests the flags are keyed by the option names"""

        args = build_parser().parse_args([
            'exponent', '--model', 'linear', '--window', '0.2', '0.8',
            '--lambda', '1.5', '-j', '3', '--record-paths', '4'
            ])
        self.assertEqual(get_flags(args), {
            'model': 'linear', 'fit-window': [0.2, 0.8], 'lambda': 1.5,
            'workers': 3, 'record-paths': 4,
            })

    def test_verify(self):

        """Tests a passing verification returns zero"""

        config_file = os.path.join(self.work_dir, 'run.cfg')
        with open(config_file, 'w') as file_obj:
            file_obj.write('lemma-trials = 2000\n')

        ret = main(['verify', '-q', '-c', config_file, '-o', self.out])
        self.assertEqual(ret, 0)
        self.assertTrue(
            os.path.isfile(os.path.join(self.out, 'verify_report.txt'))
            )

    def test_invalid_config(self):

        """Tests invalid options give the configuration status"""

        self.assert_exit(['simulate', '-q', '--p', '1.5', '-o', self.out], 2)
        self.assert_exit(
            ['simulate', '-q', '--delta', '0.01', '-o', self.out], 2
            )
        self.assert_exit(['plot'], 2)
        self.assert_exit([
            'compare', '-q', '--scheme', 'em', '--delta', '0.01',
            '-o', self.out
            ], 2)

    def test_missing_file(self):

        """Tests an unreadable configuration file gives the general status"""

        self.assert_exit([
            'simulate', '-q', '-c', os.path.join(self.work_dir, 'no.cfg'),
            '-o', self.out
            ], 1)

    def test_estimation_failure(self):

        """Tests an unstable model gives the estimation status"""

        self.assert_exit([
            'exponent', '-q', '--model', 'linear', '--mu', '0.5',
            '--steps', '100', '--paths', '10', '-o', self.out
            ], 4)
