""" The `segrank` command.

Exit codes: 0 on success, 2 for configuration errors, 3 for data errors and
4 for internal errors.
"""
import sys
import logging
import argparse
import segrank
from segrank.errors import Error, ConfigError, InvariantError
from segrank.configure import RunConfig
from segrank.runner import Runner, configure_logging, add_file_handler

STATS_SOURCES = ("web", "querylog")

logger = logging.getLogger(__name__)

FORMATS = """
input formats:
  n-gram statistics   ngram<TAB>count per line, e.g. "new york<TAB>1200";
                      "__TOTAL__<TAB>N" sets the unigram token mass
  titles              one title per line, e.g. "new york"
  queries (topk, segment)
                      one raw query per line, e.g. "new york hotels"
  annotated corpus    JSON-lines, e.g.
                      {"query": "new york hotels", "annotations": [[0, 1], [0, 1], [1, 1]]}
  predictions         JSON-lines, e.g. {"segmentation": "new york / hotels"}
  documents           JSON-lines, e.g. {"id": "d1", "title": "...", "body": "..."}
                      with fields url, title, body, meta_keywords,
                      meta_description, anchor, associated_queries
  queries (rank)      query_id<TAB>query_text, e.g. "q1<TAB>new york hotels"
  judgments           query_id<TAB>doc_id<TAB>grade (0-4), e.g. "q1<TAB>d1<TAB>3"
  feature matrix      grade qid:<id> <index>:<value> ... # doc_id,
                      e.g. "2 qid:q1 1:0.5 2:0 # d1"

exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error
"""


def _key_value(text):

    if "=" not in text:
        raise argparse.ArgumentTypeError("expected NAME=FILE, got %r" % text)
    return tuple(text.split("=", 1))


def _stats_source(text):
    """ SOURCE=FILE, or a bare FILE for the web source """

    source, sep, filename = text.partition("=")
    if sep and source in STATS_SOURCES:
        return source, filename
    return "web", text


def _int_list(text):

    try:
        return [int(value) for value in text.split(",") if len(value.strip()) > 0]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated integers, got %r" % text)


def _float_list(text):

    try:
        return [float(value) for value in text.split(",") if len(value.strip()) > 0]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated numbers, got %r" % text)


def build_parser():

    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run options")
    group.add_argument("--config", help="YAML or JSON run configuration")
    group.add_argument("--save-config", metavar="FILE",
                       help="write the effective configuration (.yaml or .json) for a later --config")
    group.add_argument("--stats", action="append", type=_stats_source, default=[],
                       metavar="[SOURCE=]FILE",
                       help="n-gram statistics of a source (web, querylog); a bare FILE is web")
    group.add_argument("--titles", help="title list")
    group.add_argument("--k", type=int, help="number of WBN candidates (default 6)")
    group.add_argument("--seed", type=int, help="random seed (default 0)")
    group.add_argument("--debug", action="store_true", help="log at debug level")
    group.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    group.add_argument("--log-file", help="also write the log to this file")

    parser = argparse.ArgumentParser(prog="segrank",
                                     description="Query segmentation by re-ranking, and "
                                                 "ranking documents with segmented queries.",
                                     epilog=FORMATS,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version="%(prog)s " + segrank.__version__)
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    def command(name, help):
        return commands.add_parser(name, parents=[common], help=help, description=help,
                                   epilog=FORMATS,
                                   formatter_class=argparse.RawDescriptionHelpFormatter)

    sub = command("topk", "write the top-k WBN candidates of each query")
    sub.add_argument("--queries", default="-", help="query file (default: standard input)")
    sub.add_argument("--check", action="store_true",
                     help="compare with exhaustive scoring (queries up to enumeration_limit tokens)")
    sub.add_argument("--output", default="-")

    sub = command("segment", "segment each query")
    sub.add_argument("--queries", default="-", help="query file (default: standard input)")
    sub.add_argument("--segmenter", help="none, wbn, rerank, WT, NP or precomputed")
    sub.add_argument("--model", help="re-ranking model (rerank segmenter)")
    sub.add_argument("--predictions", help="precomputed segmentations (WT, NP)")
    sub.add_argument("--output", default="-")

    sub = command("train-rerank", "train the re-ranking model on an annotated corpus")
    sub.add_argument("--gold", required=True, help="annotated corpus")
    sub.add_argument("--model-out", required=True)
    sub.add_argument("--c", type=float)
    sub.add_argument("--j", type=float)
    sub.add_argument("--b", type=int, choices=(0, 1))
    sub.add_argument("--scaling", choices=("none", "zscore"))
    sub.add_argument("--cv", action="store_true", help="pick c, j and b by cross validation")

    sub = command("sweep", "cross validate the re-ranker over a parameter grid")
    sub.add_argument("--gold", required=True, help="annotated corpus")
    sub.add_argument("--grid-c", type=_float_list)
    sub.add_argument("--grid-j", type=_float_list)
    sub.add_argument("--grid-b", type=_int_list)
    sub.add_argument("--folds", type=int)
    sub.add_argument("--scaling", choices=("none", "zscore"))
    sub.add_argument("--output", default="-")

    sub = command("eval-seg", "score segmenters against fused gold segmentations")
    sub.add_argument("--gold", required=True, help="annotated corpus")
    sub.add_argument("--segmenter", action="append", default=[],
                     help="none, wbn or rerank; repeatable")
    sub.add_argument("--model", help="re-ranking model (rerank segmenter)")
    sub.add_argument("--predictions", action="append", type=_key_value, default=[],
                     metavar="NAME=FILE", help="precomputed segmentations, NAME is WT, NP or "
                                               "precomputed; repeatable")
    sub.add_argument("--average", choices=("micro", "macro"))
    sub.add_argument("--reference", choices=("bwc", "wqs"),
                     help="annotate the report with published values")
    sub.add_argument("--output", default="-")

    sub = command("fuse", "fuse annotator breaks into gold segmentations")
    sub.add_argument("--input", required=True, help="annotated corpus")
    sub.add_argument("--summary", help="also write segment length statistics to this file")
    sub.add_argument("--output", default="-")

    sub = command("coverage", "share of gold segmentations among the top k candidates")
    sub.add_argument("--gold", required=True, help="annotated corpus")
    sub.add_argument("--max-k", type=int, default=10)
    sub.add_argument("--output", default="-")

    sub = command("index", "add key n-gram fields to a document corpus")
    sub.add_argument("--corpus", required=True)
    sub.add_argument("--budget", type=int, help="key n-grams per document (default 20)")
    sub.add_argument("--output", required=True)

    sub = command("rank", "write relevance feature matrices of judged documents")
    sub.add_argument("--corpus", required=True)
    sub.add_argument("--queries", default="-", help="query file (default: standard input)")
    sub.add_argument("--judgments", required=True)
    sub.add_argument("--scheme", choices=("bm25", "kn", "dm"))
    sub.add_argument("--segmenter", help="none, wbn, rerank, WT, NP or precomputed")
    sub.add_argument("--rep", choices=("wp", "p", "w"))
    sub.add_argument("--model", help="re-ranking model (rerank segmenter)")
    sub.add_argument("--predictions", help="precomputed segmentations (WT, NP)")
    sub.add_argument("--dm-weights", help="n-gram<TAB>7 weights file for the dm scheme")
    sub.add_argument("--window", type=int, help="dm window (default 8)")
    sub.add_argument("--output", default="-")

    sub = command("eval-rank", "train a linear combiner and report NDCG")
    sub.add_argument("--train", help="training feature matrix")
    sub.add_argument("--test", help="evaluation feature matrix (default: the training matrix)")
    sub.add_argument("--ndcg", type=_int_list, help="cutoffs, e.g. 1,5,10")
    sub.add_argument("--model-in", help="use this combiner instead of training one")
    sub.add_argument("--model-out", help="save the trained combiner")
    sub.add_argument("--output", default="-")

    return parser


def load_config(args):
    """ Builds the RunConfig of a run: the configuration file, if any, with
    command line values on top """

    overrides = dict()
    stats = dict(args.stats)
    for key in ("titles", "k", "seed"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)

    optional = dict(c="c", j="j", b="b", scaling="feature_scaling", folds="folds",
                    average="average", scheme="scheme", rep="rep", dm_weights="dm_weights",
                    window="dm_window", ndcg="ndcg", budget="key_ngram_budget")
    for flag, key in optional.items():
        if getattr(args, flag, None) is not None:
            overrides[key] = getattr(args, flag)
    if getattr(args, "segmenter", None) is not None and isinstance(args.segmenter, str):
        overrides["segmenter"] = args.segmenter

    grid = dict((key, getattr(args, "grid_%s" % key, None)) for key in ("c", "j", "b"))
    grid = dict((key, value) for key, value in grid.items() if value is not None)

    if args.config is not None:
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    values = config.to_dict()
    values["stats"].update(stats)
    values["grid"].update(grid)
    values.update(overrides)
    return RunConfig(values)


def run(args, runner):

    command = args.command
    if command == "topk":
        runner.topk(args.queries, output=args.output, check=args.check)
    elif command == "segment":
        runner.segment(args.queries, output=args.output, model=args.model,
                       predictions=args.predictions)
    elif command == "train-rerank":
        runner.train_rerank(args.gold, args.model_out, cross_validate=args.cv)
        return args.model_out
    elif command == "sweep":
        runner.sweep(args.gold, output=args.output)
    elif command == "eval-seg":
        systems = [(name, args.model, None) for name in args.segmenter]
        systems += [(name, None, filename) for name, filename in args.predictions]
        runner.eval_seg(args.gold, systems, output=args.output, reference=args.reference)
    elif command == "fuse":
        runner.fuse(args.input, output=args.output, summary=args.summary)
    elif command == "coverage":
        if args.max_k < 1:
            raise ConfigError("--max-k must be at least 1")
        runner.coverage(args.gold, output=args.output, max_k=args.max_k)
    elif command == "index":
        runner.index(args.corpus, args.output)
    elif command == "rank":
        runner.rank(args.corpus, args.queries, args.judgments, output=args.output,
                    model=args.model, predictions=args.predictions)
    elif command == "eval-rank":
        runner.eval_rank(args.train, test=args.test, output=args.output,
                         model_in=args.model_in, model_out=args.model_out)
    else:
        raise InvariantError("Unknown command %r" % command)
    return getattr(args, "output", None)


def main(argv=None):
    """ Entry point of the `segrank` command. Returns the exit code. """

    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.WARNING if args.quiet else logging.INFO
    configure_logging(level=level, debug=args.debug)
    if args.log_file is not None:
        add_file_handler(args.log_file, level=logging.DEBUG if args.debug else level)

    try:
        config = load_config(args)
        if args.save_config is not None:
            config.save(args.save_config)
        runner = Runner(config, command=args.command)
        output = run(args, runner)
        runner.write_manifest(output)
    except Error as e:
        logger.critical("%s: %s" % (e.__class__.__name__, e))
        return getattr(e, "exit_code", InvariantError.exit_code)
    except Exception:
        logger.critical("Internal error", exc_info=True)
        return InvariantError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
