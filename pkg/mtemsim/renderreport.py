"""
Verification report rendering
=============================

The ``verify`` subcommand writes, besides its CSV tables, a human-readable
report rendered from the packaged mustache template.

"""

import logging

import pkg_resources
import pystache


logger = logging.getLogger(__name__)


def _fmt(value):
    return '%.10g' % value


def gen_render_dict(summary):

    """Generates the dictionary for rendering the template

    :param summary: A dictionary with the entries ``version``, ``model``,
        ``p``, ``delta``, ``radius``, ``provenance``, ``lambda``,
        ``lambda-source``, ``epsilon``, ``khasminskii``, the step-size
        condition report under ``step-condition`` and the rows of the
        property checks under ``lemma-rows``, with the columns lemma, radius,
        state, value, bound and verdict.

    """

    render_dict = {
        'version': summary['version'],
        'model': summary['model'],
        'provenance': summary['provenance'],
        'lambda-source': summary['lambda-source'],
        }
    for key in ['p', 'delta', 'radius', 'lambda', 'epsilon', 'khasminskii']:
        render_dict[key] = _fmt(summary[key])

    step_report = summary['step-condition']
    render_dict['step-rows'] = [
        {
            'delta': _fmt(row.delta), 'h': _fmt(row.radius),
            'lipschitz': _fmt(row.lipschitz), 'product': _fmt(row.product),
            }
        for row in step_report.rows
        ]
    render_dict['step-verdict'] = step_report.verdict

    failures = [] if step_report.verdict else ['step-size condition']
    lemma_rows = []
    for lemma, radius, state, value, bound, verdict in summary['lemma-rows']:
        lemma_rows.append({
            'verdict': 'pass' if verdict else 'FAIL',
            'lemma': lemma,
            'radius': _fmt(radius),
            'state': '' if state is None else _fmt(state),
            'value': _fmt(value),
            'bound': _fmt(bound),
            })
        if not verdict:
            failures.append('%s at radius %s' % (lemma, _fmt(radius)))
    render_dict['lemma-rows'] = lemma_rows

    render_dict['failures'] = failures
    render_dict['passed'] = len(failures) == 0

    return render_dict


def render_report(output_file, summary):

    """Renders the verification report into the output file

    :returns: If all the checks passed

    """

    render_dict = gen_render_dict(summary)

    template = pkg_resources.resource_string(
        __name__, 'data/verifyreport.txt.mustache'
        ).decode('utf-8')
    renderer = pystache.Renderer(escape=lambda u: u)
    result = renderer.render(template, render_dict)

    with open(output_file, 'w', newline='') as report_file:
        report_file.write(result)
    logger.info('Written %s', output_file)

    return render_dict['passed']
