import os
import copy
import hashlib
import logging
from segrank.errors import ConfigError, LoadError
from segrank.rerank import DEFAULT_INDICATOR_WORDS
from segrank.utils import dumps

logger = logging.getLogger(__name__)


class ConfigureJSON(object):

    @classmethod
    def load(cls, config_file):
        """ Load run parameters from a JSON configuration file

        Parameters
        ----------
        config_file: string
            path to a JSON configuration file

        Returns
        -------
        dictionary of parameters
        """
        try:
            import simplejson as json
        except ImportError:
            import json

        try:
            with open(config_file, "r") as config:
                return json.load(config)
        except (IOError, OSError) as e:
            raise LoadError("Could not read %s: %s" % (config_file, e))
        except ValueError as e:
            raise ConfigError("%s is not valid JSON: %s" % (config_file, e))

    @staticmethod
    def save(parameters, filename, overwrite=False):
        """ Save a dictionary of parameters to a JSON config file

        Parameters
        ----------
        parameters: dictionary
            run parameters
        filename: string
            path to output file
        overwrite: bool
            whether or not to overwrite if the output file already exists
        """
        try:
            import simplejson as json
        except ImportError:
            import json

        if os.path.exists(filename) and (overwrite is False):
            raise IOError("File %s already exists! To overwrite, set overwrite=True" % filename)

        with open(filename, "w") as json_file:
            json.dump(parameters,
                      json_file,
                      sort_keys=True,
                      indent=4,
                      separators=(",", ":"))


class ConfigureYAML(object):
    """ Configuration using YAML files. Several documents in one file are
    returned as a list; a file with one document gives a dictionary.
    """

    @classmethod
    def load(cls, config_file):
        """ Load run parameters from a YAML configuration file

        Parameters
        ----------
        config_file: string
            path to a YAML configuration file

        Returns
        -------
        dictionary (or list of dictionaries) of parameters
        """
        try:
            import yaml
        except ImportError:
            raise ImportError("Pyyaml is required to use a .yaml configuration file")

        parameters = list()
        try:
            with open(config_file, "r") as config:
                for val in yaml.safe_load_all(config):
                    parameters.append(val)
        except (IOError, OSError) as e:
            raise LoadError("Could not read %s: %s" % (config_file, e))
        except yaml.YAMLError as e:
            raise ConfigError("%s is not valid YAML: %s" % (config_file, e))

        if len(parameters) == 1:
            parameters = parameters[0]

        return parameters

    @staticmethod
    def save(parameters, filename, overwrite=False):
        """ Save a dictionary of parameters to a YAML config file

        Parameters
        ----------
        parameters: dictionary
            run parameters
        filename: string
            path to output file
        overwrite: bool
            whether or not to overwrite if the output file already exists
        """
        try:
            import yaml
        except ImportError:
            raise ImportError("Pyyaml is required to use a .yaml configuration file")

        if os.path.exists(filename) and (overwrite is False):
            raise IOError("File %s already exists! To overwrite, set overwrite=True" % filename)

        with open(filename, "w") as yaml_file:
            yaml.safe_dump(parameters, yaml_file,
                           indent=4,
                           default_flow_style=False,
                           explicit_start=True,
                           explicit_end=True)


DEFAULTS = dict(stats=dict(),
                wbn_source="web",
                mi_source=None,
                titles=None,
                k=6,
                enumeration_limit=16,
                grid=dict(c=[0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50],
                          j=[1 + 0.5 * ii for ii in range(15)],
                          b=[1, 0]),
                folds=4,
                c=2.0,
                j=1.0,
                b=1,
                max_epochs=100000,
                tolerance=1e-6,
                feature_scaling="none",
                drop_absent_gold=False,
                indicator_words=list(DEFAULT_INDICATOR_WORDS),
                bm25=dict(k1=1.2, b=0.75, fields=dict()),
                key_ngram_budget=20,
                dm_window=8,
                dm_weights=None,
                scheme="bm25",
                segmenter="wbn",
                rep="wp",
                seed=0,
                ltr=dict(max_rounds=25, patience=5, validation_fraction=0.25, metric_k=10),
                ndcg=[1, 5, 10],
                average="micro")


NESTED = ("stats", "grid", "bm25", "ltr")


def _merge_documents(documents, filename):
    """ Merges the documents of a multi-document YAML file in order. Later
    documents override earlier ones; nested mappings merge key by key. """

    merged = dict()
    for document in documents:
        if document is None:
            continue
        if not isinstance(document, dict):
            raise ConfigError("%s must hold a mapping of parameters" % filename)
        for key, value in document.items():
            if key in NESTED and isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = dict(merged[key], **value)
            else:
                merged[key] = value
    return merged

class RunConfig(object):
    """ Every tunable of a run, validated

    Parameters
    ----------
    parameters: dict
        values overriding the defaults. Nested "grid", "bm25" and "ltr"
        dictionaries are merged key by key.

    Raises
    ------
    ConfigError
        On unknown keys or invalid values
    """

    def __init__(self, parameters=None):

        parameters = dict(parameters or dict())
        unknown = set(parameters) - set(DEFAULTS)
        if len(unknown) > 0:
            raise ConfigError("Unknown configuration keys: %s" % ", ".join(sorted(unknown)))

        values = copy.deepcopy(DEFAULTS)
        for key, value in parameters.items():
            if key in ("grid", "bm25", "ltr") and isinstance(value, dict):
                values[key].update(value)
            else:
                values[key] = value
        self._values = values
        self.validate()

    @classmethod
    def from_file(cls, filename, overrides=None):
        """ Loads a .yaml, .yml or .json configuration file """

        ext = os.path.splitext(filename)[1].lower()
        if ext in (".yaml", ".yml"):
            parameters = ConfigureYAML.load(filename)
        elif ext == ".json":
            parameters = ConfigureJSON.load(filename)
        else:
            raise ConfigError("Configuration extension %s is of unknown type" % ext)
        if isinstance(parameters, list):
            parameters = _merge_documents(parameters, filename)
        if parameters is None:
            parameters = dict()
        if not isinstance(parameters, dict):
            raise ConfigError("%s must hold a mapping of parameters" % filename)

        # file names in a configuration are relative to the configuration file
        base = os.path.dirname(os.path.abspath(filename))
        if isinstance(parameters.get("stats"), dict):
            parameters["stats"] = dict((source, os.path.join(base, path))
                                       for source, path in parameters["stats"].items())
        for key in ("titles", "dm_weights"):
            if isinstance(parameters.get(key), str):
                parameters[key] = os.path.join(base, parameters[key])

        parameters.update(overrides or dict())
        logger.info("Loaded configuration from %s" % filename)
        return cls(parameters)

    def __getattr__(self, name):

        try:
            return self.__dict__["_values"][name]
        except KeyError:
            raise AttributeError(name)

    def save(self, filename, overwrite=False):
        """ Writes the full configuration as .yaml, .yml or .json. Loading the
        file again gives an equal configuration. """

        if os.path.exists(filename) and not overwrite:
            raise ConfigError("%s already exists" % filename)
        ext = os.path.splitext(filename)[1].lower()
        if ext in (".yaml", ".yml"):
            ConfigureYAML.save(self.to_dict(), filename, overwrite=overwrite)
        elif ext == ".json":
            ConfigureJSON.save(self.to_dict(), filename, overwrite=overwrite)
        else:
            raise ConfigError("Configuration extension %s is of unknown type" % ext)
        logger.info("Saved configuration to %s" % filename)

    def validate(self):

        v = self._values
        checks = [(isinstance(v["k"], int) and v["k"] >= 1, "k must be an integer >= 1"),
                  (isinstance(v["enumeration_limit"], int) and v["enumeration_limit"] >= 1,
                   "enumeration_limit must be an integer >= 1"),
                  (isinstance(v["folds"], int) and v["folds"] >= 2, "folds must be an integer >= 2"),
                  (_number(v["c"]) and v["c"] > 0, "c must be positive"),
                  (_number(v["j"]) and v["j"] > 0, "j must be positive"),
                  (v["b"] in (0, 1, True, False), "b must be 0 or 1"),
                  (isinstance(v["max_epochs"], int) and v["max_epochs"] >= 1,
                   "max_epochs must be an integer >= 1"),
                  (_number(v["tolerance"]) and v["tolerance"] >= 0, "tolerance must be >= 0"),
                  (v["feature_scaling"] in ("none", "zscore"), "feature_scaling must be none or zscore"),
                  (isinstance(v["stats"], dict), "stats must map source names to files"),
                  (isinstance(v["indicator_words"], list) and len(v["indicator_words"]) > 0,
                   "indicator_words must be a non-empty list"),
                  (isinstance(v["key_ngram_budget"], int) and v["key_ngram_budget"] >= 1,
                   "key_ngram_budget must be an integer >= 1"),
                  (isinstance(v["dm_window"], int) and v["dm_window"] >= 2,
                   "dm_window must be an integer >= 2"),
                  (v["scheme"] in ("bm25", "kn", "dm"), "scheme must be bm25, kn or dm"),
                  (v["rep"] in ("wp", "p", "w"), "rep must be wp, p or w"),
                  (isinstance(v["seed"], int), "seed must be an integer"),
                  (isinstance(v["ndcg"], list) and len(v["ndcg"]) > 0 and
                   all(isinstance(k, int) and k >= 1 for k in v["ndcg"]),
                   "ndcg must be a list of cutoffs >= 1"),
                  (v["average"] in ("micro", "macro"), "average must be micro or macro"),
                  (_number(v["bm25"].get("k1")) and v["bm25"]["k1"] > 0, "bm25 k1 must be positive"),
                  (_number(v["bm25"].get("b")) and 0 <= v["bm25"]["b"] <= 1,
                   "bm25 b must be within [0, 1]"),
                  (all(isinstance(v["grid"].get(key), list) and len(v["grid"][key]) > 0
                       for key in ("c", "j", "b")), "grid needs non-empty c, j and b lists"),
                  (isinstance(v["ltr"].get("max_rounds"), int) and v["ltr"]["max_rounds"] >= 1,
                   "ltr max_rounds must be an integer >= 1"),
                  (isinstance(v["ltr"].get("patience"), int) and v["ltr"]["patience"] >= 1,
                   "ltr patience must be an integer >= 1"),
                  (_number(v["ltr"].get("validation_fraction")) and
                   0 <= v["ltr"]["validation_fraction"] < 1,
                   "ltr validation_fraction must be within [0, 1)"),
                  (isinstance(v["ltr"].get("metric_k"), int) and v["ltr"]["metric_k"] >= 1,
                   "ltr metric_k must be an integer >= 1")]
        for ok, message in checks:
            if not ok:
                raise ConfigError("Invalid configuration: %s" % message)

    def to_dict(self):
        return copy.deepcopy(self._values)

    def digest(self):
        """ SHA-1 of the canonical JSON form of the configuration """

        return hashlib.sha1(dumps(self._values).encode("utf-8")).hexdigest()

    def __repr__(self):
        return "RunConfig(%s)" % self.digest()[:10]


def _number(value):

    return isinstance(value, (int, float)) and not isinstance(value, bool)
