import logging
from segrank.errors import ConfigError, DataError, ParseError
from segrank.segcore import Segmentation, parse_segmentation
from segrank.wbn import topk, DEFAULT_K
from segrank.rerank import rerank
from segrank.utils import read_jsonl

logger = logging.getLogger(__name__)


class BaseSegmenter(object):
    """
    Implements the generic segmenter interface used by the harnesses.
    Subclasses implement:
    - segment(query) -> Segmentation
    """

    name = None

    def __init__(self, *args, **kwargs):

        super(BaseSegmenter, self).__init__()

    def segment(self, query):

        raise NotImplementedError("%s does not implement segment" % self.__class__.__name__)

    def segment_all(self, queries):
        """ Segments each query of a list, in order """

        segmentations = [self.segment(query) for query in queries]
        logger.debug("%s segmented %d queries" % (self, len(segmentations)))
        return segmentations

    def __str__(self):

        return "Segmenter(%s)" % self.name


class NoSegmenter(BaseSegmenter):
    """ Every word is its own segment. With this segmenter the phrase
    representation of a query equals its word representation. """

    name = "none"

    def segment(self, query):

        return Segmentation(query, [1] * (query.n - 1))


class WBNSegmenter(BaseSegmenter):
    """ Returns the top WBN candidate """

    name = "wbn"

    def __init__(self, stats, titles, k=DEFAULT_K, *args, **kwargs):

        super(WBNSegmenter, self).__init__(*args, **kwargs)
        self.stats = stats
        self.titles = titles
        self.k = k

    def candidates(self, query):

        return topk(query, self.k, self.stats, self.titles)

    def segment(self, query):

        return self.candidates(query).top.segmentation


class RerankSegmenter(WBNSegmenter):
    """ Re-ranks the WBN top-k candidates with a trained linear model

    Parameters
    ----------
    stats: NGramStats instance used for WBN scores
    titles: TitleSet instance
    model: LinearModel instance
    extractor: FeatureExtractor instance matching the model's features
    k: int
    """

    name = "rerank"

    def __init__(self, stats, titles, model, extractor, k=DEFAULT_K, *args, **kwargs):

        super(RerankSegmenter, self).__init__(stats, titles, k=k, *args, **kwargs)
        if tuple(extractor.names) != tuple(model.names):
            raise ConfigError("Model features do not match the extractor's features")
        self.model = model
        self.extractor = extractor

    def segment(self, query):

        return rerank(self.candidates(query), self.model, self.extractor)


class PrecomputedSegmenter(BaseSegmenter):
    """ Replays segmentations produced outside the package

    Parameters
    ----------
    segmentations: dict
        mapping from the space-joined query tokens to a Segmentation

    Each record of the JSON-lines input holds a "segmentation" in slash
    notation, e.g. `{"segmentation": "new york / hotels"}`.
    """

    name = "precomputed"

    def __init__(self, segmentations, *args, **kwargs):

        super(PrecomputedSegmenter, self).__init__(*args, **kwargs)
        self.segmentations = dict(segmentations)

    @classmethod
    def from_file(cls, filename):

        segmentations = dict()
        for line_number, record in read_jsonl(filename):
            try:
                segmentation = parse_segmentation(record["segmentation"])
            except (KeyError, TypeError) as e:
                raise ParseError("missing segmentation (%s)" % e, filename, line_number)
            segmentations[" ".join(segmentation.query.tokens)] = segmentation
        logger.info("Loaded %d %s segmentations from %s" % (len(segmentations), cls.name, filename))
        return cls(segmentations)

    def segment(self, query):

        try:
            segmentation = self.segmentations[" ".join(query.tokens)]
        except KeyError:
            raise DataError("No %s segmentation for %r" % (self.name, query))
        return Segmentation(query, segmentation.breaks)


class WTSegmenter(PrecomputedSegmenter):
    """ Precomputed segmentations of the Wikipedia-title based baseline """

    name = "WT"


class NPSegmenter(PrecomputedSegmenter):
    """ Precomputed segmentations of the noun phrase baseline """

    name = "NP"


SEGMENTERS = dict((cls.name, cls) for cls in (NoSegmenter, WBNSegmenter, RerankSegmenter,
                                             PrecomputedSegmenter, WTSegmenter, NPSegmenter))


def get_segmenter(name):
    """ Looks up a segmenter class by name

    Raises
    ------
    ConfigError
        If no segmenter has that name
    """
    try:
        return SEGMENTERS[name]
    except KeyError:
        raise ConfigError("Unknown segmenter %r, choose one of %s" % (
            name, ", ".join(sorted(SEGMENTERS))))

