from factcheck.verification.features import (
    Channel,
    FeatureConfig,
    Premise,
    Side,
    concat_evidence,
    feature_block,
    number_feature,
    wordnet_channels,
)
from factcheck.verification.ontology import (
    Direction,
    OntologyGraph,
    Relation,
    hypernym_distance,
    load_ontology,
)
from factcheck.verification.verifier import (
    VerifExample,
    build_verification_training,
    enhance_all,
    enhance_evidence,
    sample_nei_evidence,
    train_vnsmn,
    verification_inputs,
    verify,
    verify_all,
)
