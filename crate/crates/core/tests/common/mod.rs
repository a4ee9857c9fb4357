pub mod golden_facts;
