import argparse
import logging
from pathlib import Path

import yaml

from .config import Config, _deep_merge
from .corrupt import CorruptionSpec
from .errors import ConfigurationError, SogPlaceError, exit_code_for
from .grid import ClassTable, RoiGrid, finalize, load_psog, save_psog
from .ingest import PsogBuilder, SceneDirectory, SceneParams, gen_scene
from .metric import (CorrelationChartRenderer, correlation_table, detection_relabel,
                     join_performance, metric_row, metric_table, msog, performance_columns,
                     read_table, smig, write_table)
from .metric.report import SCORE_COLUMNS
from .optimizer import (ConstraintSpec, OptimizeSettings, PlacementObjective, SearchSpace,
                        certify, optimize)
from .raycast import (LidarSpec, OcclusionMode, Placement, coverage, load_baselines,
                      load_placement, load_placement_group, save_placement)
from .utils import RunManifest, apply_thread_count, resolve_thread_count, write_yaml

logger = logging.getLogger(__name__)

BEST_PLACEMENT_FILE = 'best_placement.yaml'
LOG_FILE = 'optimization_log.csv'
CERTIFICATE_FILE = 'certificate.yaml'


def _common_args(suppress=False):
    """Flags accepted before and after the subcommand; subcommands must not reset them"""
    common = argparse.ArgumentParser(add_help=False)
    extra = {'default': argparse.SUPPRESS} if suppress else {}
    common.add_argument('--config', help='Per-run config file layered over config.yaml', **extra)
    common.add_argument('--set', action='append', metavar='SECTION.KEY=VALUE',
                        help='Override one config value (repeatable)',
                        **(extra or {'default': []}))
    common.add_argument('--threads', type=int,
                        help='Worker threads (default: SOGPLACE_THREADS or all cores)', **extra)
    common.add_argument('--debug', action='store_true', help='Enable debug logging', **extra)
    return common


def build_parser():
    common = _common_args(suppress=True)
    parser = argparse.ArgumentParser(
        prog='sogplace', parents=[_common_args()],
        description='Score and optimize multi-LiDAR placements with semantic occupancy entropy')
    sub = parser.add_subparsers(dest='command', required=True)

    scene = sub.add_parser('scene', parents=[common], help='Generate a synthetic labeled scene')
    scene.add_argument('--params', help='Scene parameter file (YAML)')
    scene.add_argument('--frames', type=int, help='Number of frames')
    scene.add_argument('--out', required=True, help='Output scene directory')

    psog = sub.add_parser('psog', parents=[common], help='Build a P-SOG from a scene directory')
    psog.add_argument('--scene', required=True, help='Scene directory')
    psog.add_argument('--out', required=True, help='Output P-SOG file')
    psog.add_argument('--window', type=int, help='Frames merged per dense cloud')
    psog.add_argument('--corrupt', metavar='KIND=PARAM,...',
                      help='Corrupt raw frames first, e.g. fog=0.01,seed=3')

    evaluate = sub.add_parser('eval', parents=[common], help='Score placements on a P-SOG')
    evaluate.add_argument('--psog', required=True, help='P-SOG file')
    evaluate.add_argument('--placement', action='append', default=[], help='Placement file (repeatable)')
    evaluate.add_argument('--baselines', action='store_true', help='Include the seven bundled baselines')
    evaluate.add_argument('--reference', action='store_true', help='Include the bundled reference placements')
    _add_metric_args(evaluate)
    evaluate.add_argument('--out', required=True, help='Output metric rows (CSV)')

    opt = sub.add_parser('optimize', parents=[common], help='Optimize a placement with CMA-ES')
    opt.add_argument('--psog', required=True, help='P-SOG file')
    opt.add_argument('--out-dir', required=True, help='Output directory')
    opt.add_argument('--seed-placement', action='append', default=[],
                     help='Placement file scored before the first iteration (repeatable)')
    _add_metric_args(opt)

    report = sub.add_parser('report', parents=[common], help='Correlate metric rows with performance')
    report.add_argument('--rows', required=True, help='Metric rows from eval (CSV)')
    report.add_argument('--performance', required=True, help='Performance table with a name column (CSV)')
    report.add_argument('--out', required=True, help='Output correlation table (CSV)')
    report.add_argument('--plot', help='Also render a scatter chart (PNG)')
    return parser


def _add_metric_args(parser):
    parser.add_argument('--mode', choices=['segmentation', 'detection'], help='Metric mode')
    parser.add_argument('--target', help='Detection target class')
    parser.add_argument('--occlusion', help="'none' or 'threshold:<tau>'")


def parse_args(argv=None):
    return build_parser().parse_args(argv)


def configure_logging(debug=False):
    logging.basicConfig(level=logging.DEBUG if debug else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', force=True)
    logging.getLogger('numba').setLevel(logging.WARNING)
    logging.getLogger('matplotlib').setLevel(logging.WARNING)


def _metric_settings(args, config):
    section = config.metric
    mode = args.mode or section.get('mode', 'segmentation')
    target = args.target or section.get('target_class')
    occlusion = OcclusionMode.parse(args.occlusion) if args.occlusion else OcclusionMode.from_config(config)
    return mode, target, occlusion


def _load_prob(path):
    psog = load_psog(path)
    logger.info("Loaded P-SOG %s, %d classes, T=%d", psog.grid.shape, psog.classes.n_classes,
                psog.frames_seen)
    return finalize(psog)


def cmd_scene(args, config, threads):
    data = config.scene
    if args.params:
        path = Path(args.params)
        if not path.exists():
            raise ConfigurationError(f"scene parameter file not found: {path}")
        try:
            with open(path, 'r') as f:
                loaded = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"malformed scene parameter file {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"scene parameter file {path} must hold a mapping")
        data = _deep_merge(data, loaded.get('scene', loaded))
    if args.frames is not None:
        data['n_frames'] = args.frames
    params = SceneParams.from_dict(data)
    classes = ClassTable.from_config(config)

    manifest = RunManifest('scene', config.run_path, params.rng_seed)
    if args.params:
        manifest.add_input(args.params)
    scene = gen_scene(params, classes, workers=threads)
    SceneDirectory.write(args.out, scene.clouds, scene.poses, classes, params.to_dict())
    manifest.add_output(args.out)
    manifest.write(Path(args.out))
    return 0


def cmd_psog(args, config, threads):
    scene = SceneDirectory(args.scene)
    corruption = CorruptionSpec.parse(args.corrupt, config) if args.corrupt else None
    builder = PsogBuilder(RoiGrid.from_config(config), args.window, corruption)
    psog = builder.build_from_dir(scene)
    save_psog(psog, args.out)

    manifest = RunManifest('psog', config.run_path, corruption.rng_seed if corruption else None)
    manifest.add_input(args.scene)
    manifest.add_output(args.out)
    manifest.extra = {'window': builder.window, 'frames_seen': psog.frames_seen,
                      'corruption': corruption.to_dict() if corruption else None}
    manifest.write(args.out)
    return 0


def cmd_eval(args, config, threads):
    prob = _load_prob(args.psog)
    mode, target, occlusion = _metric_settings(args, config)
    spec = LidarSpec.from_config(config)

    placements = [load_placement(path) for path in args.placement]
    if args.baselines:
        placements += load_baselines(spec)
    if args.reference:
        placements += load_placement_group('reference', spec)
    if not placements:
        raise ConfigurationError("no placements to evaluate; pass --placement, --baselines or --reference")

    field = detection_relabel(prob, target) if mode == 'detection' else prob
    rows = []
    for placement in placements:
        cov = coverage(placement, field.grid, field, occlusion)
        rows.append(metric_row(placement.name, msog(field, cov), smig(field, cov)))
        logger.info("%-14s msog=%.6g N=%d", placement.name, rows[-1]['msog'], cov.n_covered)
    write_table(metric_table(rows), args.out)

    manifest = RunManifest('eval', config.run_path)
    manifest.add_input(args.psog)
    for path in args.placement:
        manifest.add_input(path)
    manifest.add_output(args.out)
    manifest.extra = {'mode': mode, 'target': target if mode == 'detection' else None,
                      'occlusion': str(occlusion)}
    manifest.write(args.out)
    return 0


def cmd_optimize(args, config, threads):
    prob = _load_prob(args.psog)
    mode, target, occlusion = _metric_settings(args, config)
    section = config.optimizer
    spec = LidarSpec.from_config(config)
    space = SearchSpace.from_config(config)
    constraints = ConstraintSpec.from_config(config)
    settings = OptimizeSettings.from_config(config, workers=threads)

    objective = PlacementObjective(prob, space, constraints, spec, occlusion, mode, target,
                                   kernel='serial' if threads > 1 else 'parallel')
    if constraints.lam is None:
        objective.constraints = constraints.with_lambda(objective.estimate_lambda(settings.rng_seed))

    seeds = [load_placement(path, spec).to_vector() for path in args.seed_placement]
    if section.get('seed_with_baselines'):
        seeds += [p.to_vector() for p in load_baselines(spec) if len(p) == space.n_lidars]
    seeds = [u for u in seeds if len(u) == space.full_dim]

    result = optimize(objective, space, settings, seed_placements=seeds)
    cert_section = section.get('certificate') or {}
    cert = certify(result.evaluations, space, result.best_g,
                   lipschitz=cert_section.get('lipschitz'),
                   max_samples=cert_section.get('max_samples'), seed=settings.rng_seed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    best = Placement.from_vector(result.best_u, spec, 'optimized')
    save_placement(best, out_dir / BEST_PLACEMENT_FILE)
    write_table(result.log, out_dir / LOG_FILE)
    write_yaml(out_dir / CERTIFICATE_FILE, {
        'certificate': cert.to_dict(),
        'status': result.status,
        'feasible': bool(result.feasible),
        'best_penalty': result.best_penalty,
        'lambda': objective.lam,
        'mode': mode,
    })

    manifest = RunManifest('optimize', config.run_path, settings.rng_seed)
    manifest.add_input(args.psog)
    for path in args.seed_placement:
        manifest.add_input(path)
    for name in (BEST_PLACEMENT_FILE, LOG_FILE, CERTIFICATE_FILE):
        manifest.add_output(out_dir / name)
    manifest.write(out_dir)
    return 0


def cmd_report(args, config, threads):
    metrics = read_table(args.rows, required=('name', 'msog'))
    performance = read_table(args.performance)
    joined = join_performance(metrics, performance)
    scores = [c for c in SCORE_COLUMNS if c in joined.columns]
    correlations = correlation_table(joined, performance_columns(performance), scores)
    write_table(correlations, args.out)

    manifest = RunManifest('report', config.run_path)
    manifest.add_input(args.rows)
    manifest.add_input(args.performance)
    manifest.add_output(args.out)
    if args.plot:
        CorrelationChartRenderer().render(joined, correlations, args.plot)
        manifest.add_output(args.plot)
    manifest.write(args.out)
    return 0


COMMANDS = {
    'scene': cmd_scene,
    'psog': cmd_psog,
    'eval': cmd_eval,
    'optimize': cmd_optimize,
    'report': cmd_report,
}


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.debug)
    try:
        config = Config.load(args.config, args.set)
        threads = apply_thread_count(resolve_thread_count(args.threads, config.run.get('threads')))
        return COMMANDS[args.command](args, config, threads)
    except (SogPlaceError, OSError) as e:
        logger.error("%s", e)
        return exit_code_for(e)
