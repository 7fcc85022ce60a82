/** API payload fixtures shaped exactly like the node's responses. */

import type {
  AccessRequestView,
  DatasetRef,
  DetailPayload,
  ListPage,
  NodeInfo,
} from "../src/types.js";

export const NODE_INFO: NodeInfo = {
  node: {
    node_id: "num",
    name: "National University of Mongolia",
    domain_description: {
      en: "University data from Ulaanbaatar, Mongolia",
      mn: "Улаанбаатар хотын их сургуулийн өгөгдөл",
    },
    base_url: "https://num.example",
    publisher: "National University of Mongolia",
  },
  counts: { standardised: 1, language: 1, knowledge: 1, graph: 2 },
};

function ref(local_id: string, kind: string, node_id = "num"): DatasetRef {
  return { node_id, local_id, version: 1, kind };
}

export const LIST_PAGE: ListPage = {
  items: [
    {
      ref: ref("university-graph", "graph"),
      title: { en: "num university graph" },
      kind: "graph",
      categories: ["education"],
      catalogue_url: "https://num.example/api/v1/datasets/num/university-graph/1",
    },
    {
      ref: ref("university-lang", "language"),
      title: { en: "num university language", mn: "хэлний давхарга" },
      kind: "language",
      categories: ["education"],
      catalogue_url: "https://num.example/api/v1/datasets/num/university-lang/1",
    },
  ],
  page: 1,
  page_size: 20,
  total: 2,
};

export const LANGUAGE_ONLY_PAGE: ListPage = {
  items: [LIST_PAGE.items[1]!],
  page: 1,
  page_size: 20,
  total: 1,
};

/** Cross-node graph: S local, L and K owned by the unitn peer. */
export const CROSS_GRAPH_DETAIL: DetailPayload = {
  record: {
    format: "metadata/1",
    ref: ref("crossuni-graph", "graph"),
    title: { en: "Cross-university graph", mn: "Их сургуулиудын нэгдсэн граф" },
    description: { en: "Mongolian rows typed by the Italian ontology" },
    categories: ["education"],
    license: "CC-BY-4.0",
    issued_at: "2026-08-10T12:00:00Z",
    publisher: "National University of Mongolia",
    download_policy: "automatic",
    links: {
      composed_of: [
        ref("university-std", "standardised"),
        ref("university-lang", "language", "unitn"),
        ref("university-onto", "knowledge", "unitn"),
      ],
      uses_language: [],
      derived_from: [],
    },
    content_hash: "c0ffee".padEnd(64, "0"),
  },
  links: {
    composed_of: [
      {
        ref: ref("university-std", "standardised"),
        catalogue_url: "https://num.example/api/v1/datasets/num/university-std/1",
      },
      {
        ref: ref("university-lang", "language", "unitn"),
        catalogue_url: "https://unitn.example/api/v1/datasets/unitn/university-lang/1",
      },
      {
        ref: ref("university-onto", "knowledge", "unitn"),
        catalogue_url: "https://unitn.example/api/v1/datasets/unitn/university-onto/1",
      },
    ],
    uses_language: [],
    derived_from: [],
  },
  download_url: "https://num.example/api/v1/datasets/num/crossuni-graph/1/download",
};

export const REQUEST_POLICY_DETAIL: DetailPayload = {
  record: {
    ...CROSS_GRAPH_DETAIL.record,
    ref: ref("university-onto", "knowledge"),
    title: { en: "num university ontology" },
    download_policy: "request",
    links: {
      composed_of: [],
      uses_language: [ref("university-lang", "language")],
      derived_from: [],
    },
  },
  links: {
    composed_of: [],
    uses_language: [
      {
        ref: ref("university-lang", "language"),
        catalogue_url: "https://num.example/api/v1/datasets/num/university-lang/1",
      },
    ],
    derived_from: [],
  },
  download_url: "https://num.example/api/v1/datasets/num/university-onto/1/download",
};

export const PENDING_REQUEST: AccessRequestView = {
  request_id: "req123",
  ref: ref("university-onto", "knowledge"),
  contact: "researcher@unitn.example",
  justification: "comparative study",
  status: "pending",
  created_at: "2026-08-10T12:00:00Z",
};
