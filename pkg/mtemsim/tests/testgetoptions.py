"""
Tests for getting the run options
=================================

"""

import json
import os
import shutil
import tempfile
import unittest

from mtemsim import getoptions as go
from mtemsim.csvout import write_manifest


class ParseKeyValuesTest(unittest.TestCase):

    """Tests the reader of key = value lines"""

    def test_parse(self):

        """Tests the parsing of a small file with comments"""

        text = '\n'.join([
            '# a comment line',
            'model = linear',
            '',
            'mu = -2.0   # trailing comment',
            'fit-window = 0.2, 0.9',
            ])
        res = go.parse_key_values(text)
        self.assertEqual(res, {
            'model': 'linear', 'mu': '-2.0', 'fit-window': ['0.2', '0.9'],
            })

    def test_errors(self):

        """Tests malformed lines and duplicate keys"""

        with self.assertRaises(go.ConfigError) as cm:
            go.parse_key_values('model = linear\nsteps 100\n', 'run.cfg')
        self.assertEqual(cm.exception.args[0], 'run.cfg line 2')

        with self.assertRaises(go.ConfigError) as cm:
            go.parse_key_values('steps = 1\nsteps = 2\n')
        self.assertEqual(cm.exception.args[0], 'steps')


class ParseConfigTest(unittest.TestCase):

    """Tests the chaining and validation of the options"""

    def test_defaults(self):

        """Tests the packaged defaults are valid"""

        config = go.parse_config()
        self.assertEqual(config.model, 'example41')
        self.assertEqual(config.scheme, 'mtem')
        self.assertEqual(config.delta, 5.0E-4)
        self.assertEqual(config.steps, 10000)
        self.assertEqual(config.fit_window, (0.4, 1.0))
        self.assertEqual(config.lemma_radii, (1.0, 2.0, 5.0))
        self.assertEqual(config.lam, 0.0)
        self.assertEqual(config.workers, 1)

    def test_text_conversion(self):

        """Tests the string values are converted to the default types"""

        config = go.parse_config(text='\n'.join([
            'model = linear',
            'mu = -2',
            'steps = 500',
            'lemma-radii = 3',
            'fit-window = 0.5, 1',
            ]))
        self.assertEqual(config.model, 'linear')
        self.assertEqual(config.mu, -2.0)
        self.assertIsInstance(config.mu, float)
        self.assertEqual(config.steps, 500)
        self.assertIsInstance(config.steps, int)
        self.assertEqual(config.lemma_radii, (3.0, ))
        self.assertEqual(config.fit_window, (0.5, 1.0))

    def test_precedence(self):

        """Tests the flags override the text, which overrides the defaults"""

        config = go.parse_config(
            text='paths = 10\nseed = 3\n', flags={'paths': 20}
            )
        self.assertEqual(config.paths, 20)
        self.assertEqual(config.seed, 3)

    def test_invalid_values(self):

        """Tests the constraint violations name the offending key"""

        cases = [
            ('model = cubic', 'model'),
            ('scheme = rk4', 'scheme'),
            ('moment-grid = medium', 'moment-grid'),
            ('p = 1.0', 'p'),
            ('p = 0', 'p'),
            ('delta = 0', 'delta'),
            ('delta = 1e-2', 'delta'),
            ('steps = 0', 'steps'),
            ('paths = -1', 'paths'),
            ('seed = -1', 'seed'),
            ('refinement = 0', 'refinement'),
            ('record-paths = -2', 'record-paths'),
            ('fit-window = 0.5, 0.4', 'fit-window'),
            ('fit-window = 0.1, 0.5, 0.9', 'fit-window'),
            ('lambda = -1', 'lambda'),
            ('lambda = 1\nepsilon = 1', 'epsilon'),
            ('check-deltas = 1e-5, 1e-2', 'check-deltas'),
            ('lemma-radii = 1, -1', 'lemma-radii'),
            ('x0 = nan', 'x0'),
            ('underflow-floor = 0', 'underflow-floor'),
            ('workers = 0', 'workers'),
            ('steps = many', 'steps'),
            ('unknown-key = 1', 'unknown-key'),
            ]
        for text, key in cases:
            with self.assertRaises(go.ConfigError) as cm:
                go.parse_config(text=text)
            self.assertEqual(cm.exception.args[0], key, text)

    def test_large_delta_for_em(self):

        """Tests the validity bound only applies to the MTEM scheme"""

        config = go.parse_config(text='scheme = em\ndelta = 1e-2\n')
        self.assertEqual(config.delta, 1.0E-2)

        config = go.parse_config(text='model = linear\ndelta = 0.1\n')
        self.assertEqual(config.delta, 0.1)

    def test_subcommand_delta(self):

        """Tests the subcommands needing the radius check the step size"""

        config = go.parse_config(text='scheme = em\ndelta = 1e-2\n')
        for subcommand in ['simulate', 'exponent']:
            go.check_subcommand(subcommand, config)
        for subcommand in ['compare', 'verify']:
            with self.assertRaises(go.ConfigError) as cm:
                go.check_subcommand(subcommand, config)
            self.assertEqual(cm.exception.args[0], 'delta')

        config = go.parse_config(
            text='model = linear\nscheme = em\ndelta = 0.1\n'
            )
        go.check_subcommand('compare', config)


class ConfigFileTest(unittest.TestCase):

    """Tests the reading of configuration files"""

    def setUp(self):
        self.work_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.work_dir)

    def _write(self, name, content):
        file_name = os.path.join(self.work_dir, name)
        with open(file_name, 'w') as file_obj:
            file_obj.write(content)
        return file_name

    def test_formats(self):

        """Tests the three formats give the same options"""

        files = [
            self._write('run.cfg', 'model = linear\nsteps = 300\n'
                        'fit-window = 0.2, 0.8\n'),
            self._write('run.json', json.dumps({
                'model': 'linear', 'steps': 300, 'fit-window': [0.2, 0.8],
                })),
            self._write('run.yml', 'model: linear\nsteps: 300\n'
                        'fit-window: [0.2, 0.8]\n'),
            ]
        configs = [go.parse_config(config_file=i) for i in files]
        for config in configs:
            self.assertEqual(config, configs[0])
        self.assertEqual(configs[0].steps, 300)
        self.assertEqual(configs[0].fit_window, (0.2, 0.8))

    def test_empty_yaml(self):

        """Tests an empty YAML file gives the defaults"""

        config = go.parse_config(config_file=self._write('empty.yaml', ''))
        self.assertEqual(config, go.parse_config())

    def test_bad_files(self):

        """Tests unparsable files and non-mapping contents"""

        for name, content in [('bad.json', '{"model": '),
                              ('list.json', '[1, 2]'),
                              ('bad.yml', 'model: [linear\n'),
                              ('scalar.yaml', '12\n')]:
            file_name = self._write(name, content)
            with self.assertRaises(go.ConfigError) as cm:
                go.read_config_file(file_name)
            self.assertEqual(cm.exception.args[0], file_name)

        with self.assertRaises(OSError):
            go.parse_config(
                config_file=os.path.join(self.work_dir, 'missing.cfg')
                )

    def test_manifest_replay(self):

        """Tests a written manifest gives back the same configuration"""

        config = go.parse_config(
            text='model = linear\nmu = -0.75\nseed = 12\nworkers = 4\n'
            )
        file_name = os.path.join(self.work_dir, 'manifest.json')
        write_manifest(file_name, go.config_options(config), 'exponent',
                       '0.1.0')

        with open(file_name) as file_obj:
            content = json.load(file_obj)
        self.assertNotIn('workers', content)
        self.assertEqual(content['manifest']['subcommand'], 'exponent')

        replayed = go.parse_config(config_file=file_name)
        self.assertEqual(replayed._replace(workers=4), config)
        self.assertEqual(replayed.workers, 1)
