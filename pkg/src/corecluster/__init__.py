"""Network clustering around densely co-connected core structures.

The toolkit detects "core structures" — node groups that stay connected
across the whole family of threshold graphs — grows clusters around them,
benchmarks the result against spectral clustering and a WGCNA-style pipeline
on simulated co-expression data, and scores partitions with internal,
external, and enrichment criteria.
"""

from .baselines import (
    cut_dendrogram,
    hierarchical_average_linkage,
    kmeans,
    normalized_laplacian,
    pick_soft_threshold,
    power_adjacency,
    select_k_by_dunn,
    spectral_clustering,
    spectral_embed,
    tom_similarity,
    wgcna_lite,
)
from .core import (
    CoreStructureFamily,
    Partition,
    complete_clusters,
    csd,
    detect_cores,
    sweep,
    sweep_summary,
)
from .expression import (
    ExpressionMatrix,
    filter_variables,
    knn_impute,
    load_expression,
    save_expression,
    similarity_matrix,
    standardize,
)
from .graph import (
    SimilarityMatrix,
    SpanningTree,
    WeightedGraph,
    component_of,
    connected_components,
    load_similarity,
    maximum_spanning_tree,
    save_similarity,
    threshold_graph,
)
from .metrics import (
    AnnotationSet,
    adjusted_rand,
    dissimilarity_from_similarity,
    dunn,
    fom,
    hypergeom_enrich,
    hypergeom_tail,
    modularity,
    silhouette,
)
from .simulate import (
    LabeledDataset,
    ScenarioConfig,
    gen_community,
    gen_scenario,
    replicate_suite,
)

__version__ = "0.1.0"
